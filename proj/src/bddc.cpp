#include "sbddc/bddc.hpp"

#include <cmath>
#include <unordered_map>

#include <Eigen/Eigenvalues>

#include "sbddc/errors.hpp"

namespace sbddc {

namespace {
thread_local FactorizationCounter counter;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }
}  // namespace

FactorizationCounter& factorization_counter() { return counter; }
void reset_factorization_counter() { counter = {}; }
void note_factorization(int size) {
  ++counter.count;
  counter.max_size = std::max(counter.max_size, size);
}

SchurOperator::SchurOperator(const DofPartition& dofs, std::vector<Eigen::MatrixXd> local)
    : dofs_(&dofs), n_(dofs.num_gamma()), local_(std::move(local)) {
  if (static_cast<int>(local_.size()) != dofs.num_subdomains())
    throw ConfigError("SchurOperator: one local matrix per subdomain required");
  for (int s = 0; s < dofs.num_subdomains(); ++s)
    if (local_[s].rows() != dofs.subdomain(s).n_gamma() || local_[s].cols() != local_[s].rows())
      throw ConfigError("SchurOperator: local matrix size mismatch");
}

Eigen::VectorXd SchurOperator::apply(const Eigen::VectorXd& u) const {
  if (u.size() != n_) throw ConfigError("SchurOperator::apply: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
  for (int s = 0; s < static_cast<int>(local_.size()); ++s) {
    const auto& slots = dofs_->subdomain(s).gamma_slot;
    const int m = static_cast<int>(slots.size());
    Eigen::VectorXd ul(m);
    for (int k = 0; k < m; ++k) ul[k] = u[slots[k]];
    const Eigen::VectorXd yl = local_[s] * ul;
    for (int k = 0; k < m; ++k) out[slots[k]] += yl[k];
  }
  return out;
}

Eigen::VectorXd gather_local(const SubdomainDofs& sd, const Eigen::VectorXd& free_values) {
  Eigen::VectorXd out(sd.size());
  for (int k = 0; k < sd.size(); ++k) out[k] = free_values[sd.local_free[k]];
  return out;
}

InteriorSolver::InteriorSolver(const DofPartition& dofs, const std::vector<SubdomainBlocks>& blocks)
    : dofs_(&dofs) {
  if (static_cast<int>(blocks.size()) != dofs.num_subdomains())
    throw ConfigError("InteriorSolver: one block set per subdomain required");
  a_ii_.reserve(blocks.size());
  for (const auto& b : blocks) {
    note_factorization(b.n_i);
    a_ii_.emplace_back(b.A_II());
    if (a_ii_.back().info() != Eigen::Success) throw SpdFailure("InteriorSolver: A_II is not positive definite");
    a_gi_.push_back(b.A_GI());
    a_gg_.push_back(b.A_GG());
  }
}

SchurOperator InteriorSolver::schur() const {
  std::vector<Eigen::MatrixXd> local;
  local.reserve(a_ii_.size());
  for (std::size_t s = 0; s < a_ii_.size(); ++s) {
    const Eigen::MatrixXd y = a_ii_[s].solve(a_gi_[s].transpose());
    local.push_back(symmetrized(a_gg_[s] - a_gi_[s] * y));
  }
  return SchurOperator(*dofs_, std::move(local));
}

Eigen::VectorXd InteriorSolver::reduce_rhs(const Eigen::VectorXd& f) const {
  if (f.size() != dofs_->num_free()) throw ConfigError("reduce_rhs: load vector size mismatch");
  Eigen::VectorXd g(dofs_->num_gamma());
  for (int k = 0; k < dofs_->num_gamma(); ++k) g[k] = f[dofs_->gamma()[k]];
  for (int s = 0; s < dofs_->num_subdomains(); ++s) {
    const auto& sd = dofs_->subdomain(s);
    if (sd.n_interior == 0) continue;
    const Eigen::VectorXd fl = gather_local(sd, f);
    const Eigen::VectorXd t = a_gi_[s] * a_ii_[s].solve(fl.head(sd.n_interior));
    for (int k = 0; k < sd.n_gamma(); ++k) g[sd.gamma_slot[k]] -= t[k];
  }
  return g;
}

Eigen::VectorXd InteriorSolver::recover(const Eigen::VectorXd& f, const Eigen::VectorXd& u_gamma) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs_->num_free());
  for (int k = 0; k < dofs_->num_gamma(); ++k) u[dofs_->gamma()[k]] = u_gamma[k];
  for (int s = 0; s < dofs_->num_subdomains(); ++s) {
    const auto& sd = dofs_->subdomain(s);
    if (sd.n_interior == 0) continue;
    const Eigen::VectorXd fl = gather_local(sd, f);
    Eigen::VectorXd ug(sd.n_gamma());
    for (int k = 0; k < sd.n_gamma(); ++k) ug[k] = u_gamma[sd.gamma_slot[k]];
    const Eigen::VectorXd ui = a_ii_[s].solve(fl.head(sd.n_interior) - a_gi_[s].transpose() * ug);
    for (int k = 0; k < sd.n_interior; ++k) u[sd.local_free[k]] = ui[k];
  }
  return u;
}

ScalingWeights rho_scaling(const Mesh& mesh, const DofPartition& dofs, const Eigen::VectorXd& kappa) {
  if (kappa.size() != mesh.num_cells()) throw ConfigError("rho_scaling: kappa size mismatch");
  const int ncopy = dofs.num_dual_copies();
  const long nsub = dofs.num_subdomains();
  std::unordered_map<long, int> slot;
  slot.reserve(ncopy);
  for (int k = 0; k < ncopy; ++k) {
    const int node = dofs.free_node(dofs.gamma()[dofs.dual_copy_gamma()[k]]);
    slot.emplace(node * nsub + dofs.dual_copy_subdomain()[k], k);
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(ncopy);
  Eigen::VectorXd cnt = Eigen::VectorXd::Zero(ncopy);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (!(kappa[c] > 0.0)) throw ConfigError("rho_scaling: coefficient must be positive");
    const auto& cell = mesh.cell(c);
    for (int v : cell.nodes) {
      auto it = slot.find(v * nsub + cell.subdomain);
      if (it == slot.end()) continue;
      sum[it->second] += kappa[c];
      cnt[it->second] += 1.0;
    }
  }
  Eigen::VectorXd mean = sum.cwiseQuotient(cnt);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(dofs.num_gamma());
  for (int k = 0; k < ncopy; ++k) total[dofs.dual_copy_gamma()[k]] += mean[k];
  ScalingWeights w;
  w.dual.resize(ncopy);
  for (int k = 0; k < ncopy; ++k) w.dual[k] = mean[k] / total[dofs.dual_copy_gamma()[k]];
  return w;
}

Eigen::VectorXd weighted_restrict(const DofPartition& dofs, const ScalingWeights& w,
                                  const Eigen::VectorXd& u_gamma) {
  Eigen::VectorXd t = dofs.to_tilde(u_gamma);
  t.tail(dofs.num_dual_copies()).array() *= w.dual.array();
  return t;
}

Eigen::VectorXd weighted_extend(const DofPartition& dofs, const ScalingWeights& w,
                                const Eigen::VectorXd& w_tilde) {
  Eigen::VectorXd t = w_tilde;
  t.tail(dofs.num_dual_copies()).array() *= w.dual.array();
  return dofs.from_tilde(t);
}

Eigen::VectorXd average_operator_apply(const DofPartition& dofs, const ScalingWeights& w,
                                       const Eigen::VectorXd& w_tilde) {
  if (w_tilde.size() != dofs.tilde_size()) throw ConfigError("average_operator_apply: size mismatch");
  return dofs.to_tilde(weighted_extend(dofs, w, w_tilde));
}

LocalCoarseData exact_local_data(const SubdomainBlocks& b) {
  const int ni = b.n_i;
  const int nd = b.n_d;
  note_factorization(b.n_r());
  Eigen::LLT<Eigen::MatrixXd> llt(b.A_rr());
  if (llt.info() != Eigen::Success) throw SpdFailure("exact_local_data: A_rr is not positive definite");
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(b.n_r(), nd);
  e.bottomRows(nd).setIdentity();
  LocalCoarseData out;
  out.inv_dd = symmetrized(llt.solve(e).bottomRows(nd));
  const Eigen::MatrixXd x = llt.solve(b.A_cr().transpose());
  out.x_d = x.middleRows(ni, nd);
  out.s_pi = symmetrized(b.A_cc() - b.A_cr() * x);
  return out;
}

Eigen::MatrixXd assemble_coarse(const DofPartition& dofs, const std::vector<LocalCoarseData>& local) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dofs.num_primal(), dofs.num_primal());
  for (int i = 0; i < dofs.num_subdomains(); ++i) {
    const auto& ps = dofs.subdomain(i).primal_slot;
    for (std::size_t a = 0; a < ps.size(); ++a)
      for (std::size_t b = 0; b < ps.size(); ++b) s(ps[a], ps[b]) += local[i].s_pi(a, b);
  }
  return s;
}

BddcPreconditioner::BddcPreconditioner(const DofPartition& dofs, std::vector<LocalCoarseData> local,
                                       ScalingWeights weights)
    : dofs_(&dofs), local_(std::move(local)), weights_(std::move(weights)) {
  if (static_cast<int>(local_.size()) != dofs.num_subdomains())
    throw ConfigError("BddcPreconditioner: one local data set per subdomain required");
  if (weights_.dual.size() != dofs.num_dual_copies())
    throw ConfigError("BddcPreconditioner: scaling weight size mismatch");
  for (int i = 0; i < dofs.num_subdomains(); ++i) {
    const auto& sd = dofs.subdomain(i);
    const auto& l = local_[i];
    if (l.inv_dd.rows() != sd.n_dual || l.inv_dd.cols() != sd.n_dual || l.x_d.rows() != sd.n_dual ||
        l.x_d.cols() != sd.n_primal || l.s_pi.rows() != sd.n_primal || l.s_pi.cols() != sd.n_primal)
      throw ConfigError("BddcPreconditioner: local data shape mismatch");
  }
  s_pi_ = assemble_coarse(dofs, local_);
  if (s_pi_.rows() == 0) return;
  note_factorization(static_cast<int>(s_pi_.rows()));
  s_pi_llt_.compute(s_pi_);
  bool ok = s_pi_llt_.info() == Eigen::Success;
  if (ok) {
    const Eigen::VectorXd d = s_pi_llt_.matrixL().toDenseMatrix().diagonal();
    ok = d.allFinite() && d.minCoeff() > 0.0;
  }
  if (!ok) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s_pi_, Eigen::EigenvaluesOnly);
    std::vector<int> bad;
    for (int i = 0; i < dofs.num_subdomains(); ++i) {
      const auto& sp = local_[i].s_pi;
      if (sp.size() == 0) continue;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> el(sp, Eigen::EigenvaluesOnly);
      if (el.eigenvalues()[0] < -1e-10 * std::max(1.0, el.eigenvalues().cwiseAbs().maxCoeff()))
        bad.push_back(i);
    }
    throw SpdFailure("coarse matrix S_Pi is not positive definite", std::move(bad), es.eigenvalues()[0]);
  }
}

BddcPreconditioner BddcPreconditioner::from_blocks(const DofPartition& dofs,
                                                   const std::vector<SubdomainBlocks>& blocks,
                                                   ScalingWeights weights) {
  std::vector<LocalCoarseData> local;
  local.reserve(blocks.size());
  for (const auto& b : blocks) local.push_back(exact_local_data(b));
  return BddcPreconditioner(dofs, std::move(local), std::move(weights));
}

Eigen::VectorXd BddcPreconditioner::apply_tilde(const Eigen::VectorXd& w) const {
  const int np = dofs_->num_primal();
  if (w.size() != dofs_->tilde_size()) throw ConfigError("apply_tilde: size mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(w.size());
  // Phi^T w = w_Pi - sum_i R_Pi^T X_D^T w_D.
  Eigen::VectorXd coarse = w.head(np);
  for (int i = 0; i < dofs_->num_subdomains(); ++i) {
    const auto& sd = dofs_->subdomain(i);
    const auto& l = local_[i];
    Eigen::VectorXd wd(sd.n_dual);
    for (int k = 0; k < sd.n_dual; ++k) wd[k] = w[np + sd.dual_slot[k]];
    const Eigen::VectorXd yd = l.inv_dd * wd;
    for (int k = 0; k < sd.n_dual; ++k) out[np + sd.dual_slot[k]] += yd[k];
    if (sd.n_primal > 0) {
      const Eigen::VectorXd t = l.x_d.transpose() * wd;
      for (int k = 0; k < sd.n_primal; ++k) coarse[sd.primal_slot[k]] -= t[k];
    }
  }
  if (np == 0) return out;
  const Eigen::VectorXd yc = s_pi_llt_.solve(coarse);
  out.head(np) += yc;
  for (int i = 0; i < dofs_->num_subdomains(); ++i) {
    const auto& sd = dofs_->subdomain(i);
    if (sd.n_primal == 0 || sd.n_dual == 0) continue;
    Eigen::VectorXd yl(sd.n_primal);
    for (int k = 0; k < sd.n_primal; ++k) yl[k] = yc[sd.primal_slot[k]];
    const Eigen::VectorXd t = local_[i].x_d * yl;
    for (int k = 0; k < sd.n_dual; ++k) out[np + sd.dual_slot[k]] -= t[k];
  }
  return out;
}

Eigen::VectorXd BddcPreconditioner::apply(const Eigen::VectorXd& r) const {
  if (r.size() != size()) throw ConfigError("BddcPreconditioner::apply: size mismatch");
  return weighted_extend(*dofs_, weights_, apply_tilde(weighted_restrict(*dofs_, weights_, r)));
}

BddcPreconditioner mean_preconditioner(const Mesh& mesh, const DofPartition& dofs,
                                       const CovarianceSpec& spec) {
  const Eigen::VectorXd kappa = Eigen::VectorXd::Constant(mesh.num_cells(), std::exp(0.5 * spec.sigma2));
  return BddcPreconditioner::from_blocks(dofs, assemble_all_blocks(mesh, dofs, kappa),
                                         rho_scaling(mesh, dofs, kappa));
}

}  // namespace sbddc
