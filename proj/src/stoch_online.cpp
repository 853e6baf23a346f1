#include "sbddc/stoch_online.hpp"

#include "sbddc/errors.hpp"

namespace sbddc {

namespace {

Eigen::MatrixXd upper(const Eigen::MatrixXd& r) { return r.triangularView<Eigen::Upper>(); }

bool nonsingular_upper(const Eigen::MatrixXd& r) {
  return r.diagonal().size() == 0 || (r.diagonal().allFinite() && r.diagonal().minCoeff() > 0.0);
}

}  // namespace

OnlineInstance instantiate(const OfflineStore& store, const Mesh& mesh, const DofPartition& dofs,
                           const Eigen::VectorXd& field, std::uint64_t seed) {
  if (store.ns != mesh.ns() || store.n != mesh.n())
    throw ConfigError("instantiate: offline data was built for a different mesh");
  if (field.size() != mesh.num_cells()) throw ConfigError("instantiate: field size mismatch");
  OnlineInstance inst;
  inst.seed = seed;
  const int nsub = mesh.num_subdomains();
  std::vector<LocalCoarseData> local(nsub);
  for (int s = 0; s < nsub; ++s) {
    inst.xihat.push_back(local_coordinates(restrict_to_subdomain(mesh, s, field), store.basis));
    inst.psi.push_back(basis_values(*store.set_d, inst.xihat.back()));
    const auto& psi = inst.psi.back();
    const auto& cc = store.of(s);
    const auto& sd = dofs.subdomain(s);
    auto& l = local[s];
    if (store.options.method == Method::Sg) {
      l.inv_dd = cc.inv_dd.evaluate_with(psi);
      l.x_d = cc.x_d.evaluate_with(psi);
      l.s_pi = cc.s_pi.evaluate_with(psi);
    } else {
      const Eigen::MatrixXd r = upper(cc.r_rr.evaluate_with(psi));
      if (!nonsingular_upper(r)) inst.failed_subdomains.push_back(s);
      const auto rt = r.transpose().triangularView<Eigen::Lower>();
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(sd.n_r(), sd.n_dual);
      e.bottomRows(sd.n_dual).setIdentity();
      const Eigen::MatrixXd w = rt.solve(e);
      l.inv_dd = w.transpose() * w;
      const Eigen::MatrixXd x =
          r.triangularView<Eigen::Upper>().solve(rt.solve(cc.a_cr.evaluate_with(psi).transpose()));
      l.x_d = x.middleRows(sd.n_interior, sd.n_dual);
      const Eigen::MatrixXd h = cc.h_pi.evaluate_with(psi);
      l.s_pi = h * h.transpose();
    }
  }
  if (!inst.failed_subdomains.empty()) return inst;

  const Eigen::VectorXd kappa = field.array().exp();
  try {
    inst.preconditioner.emplace(dofs, std::move(local), rho_scaling(mesh, dofs, kappa));
    inst.spd_ok = true;
  } catch (const SpdFailure& e) {
    inst.failed_subdomains = e.subdomains();
    inst.min_eigenvalue = e.min_eigenvalue();
  }
  return inst;
}

SurrogateSchur::SurrogateSchur(const OfflineStore& store, const DofPartition& dofs, const OnlineInstance& inst,
                               const Eigen::VectorXd& load)
    : dofs_(&dofs) {
  if (!store.options.surrogate) throw ConfigError("SurrogateSchur: offline data has no surrogate components");
  if (load.size() != dofs.num_free()) throw ConfigError("SurrogateSchur: load vector size mismatch");
  const int nsub = dofs.num_subdomains();
  std::vector<Eigen::MatrixXd> local(nsub);
  g_.resize(dofs.num_gamma());
  for (int k = 0; k < dofs.num_gamma(); ++k) g_[k] = load[dofs.gamma()[k]];
  y_.resize(nsub);
  x_.resize(nsub);
  for (int s = 0; s < nsub; ++s) {
    const auto& psi = inst.psi[s];
    const auto& cc = store.of(s);
    const auto& sd = dofs.subdomain(s);
    Eigen::VectorXd zf;
    if (store.options.method == Method::Sg) {
      local[s] = cc.s_gamma.evaluate_with(psi);
      x_[s] = cc.x_i.evaluate_with(psi);
      y_[s] = store.rhs[s].y_f.evaluate_with(psi);
      zf = store.rhs[s].z_f.evaluate_with(psi);
    } else {
      const Eigen::MatrixXd r = upper(cc.r_ii.evaluate_with(psi));
      if (!nonsingular_upper(r)) throw SpdFailure("SurrogateSchur: evaluated interior factor is singular", {s});
      const auto rt = r.transpose().triangularView<Eigen::Lower>();
      const auto ru = r.triangularView<Eigen::Upper>();
      const Eigen::MatrixXd a_gi = cc.a_gi.evaluate_with(psi);
      const Eigen::MatrixXd w = rt.solve(a_gi.transpose());
      local[s] = cc.a_gg.evaluate_with(psi) - w.transpose() * w;
      const Eigen::VectorXd t = rt.solve(gather_local(sd, load).head(sd.n_interior));
      zf = w.transpose() * t;
      y_[s] = ru.solve(t);
      x_[s] = ru.solve(w);
    }
    local[s] = (0.5 * (local[s] + local[s].transpose())).eval();
    for (int k = 0; k < sd.n_gamma(); ++k) g_[sd.gamma_slot[k]] -= zf[k];
  }
  op_ = SchurOperator(dofs, std::move(local));
}

Eigen::VectorXd SurrogateSchur::recover(const Eigen::VectorXd& u_gamma) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(dofs_->num_free());
  for (int k = 0; k < dofs_->num_gamma(); ++k) u[dofs_->gamma()[k]] = u_gamma[k];
  for (int s = 0; s < dofs_->num_subdomains(); ++s) {
    const auto& sd = dofs_->subdomain(s);
    Eigen::VectorXd ug(sd.n_gamma());
    for (int k = 0; k < sd.n_gamma(); ++k) ug[k] = u_gamma[sd.gamma_slot[k]];
    const Eigen::VectorXd ui = y_[s] - x_[s] * ug;
    for (int k = 0; k < sd.n_interior; ++k) u[sd.local_free[k]] = ui[k];
  }
  return u;
}

}  // namespace sbddc
