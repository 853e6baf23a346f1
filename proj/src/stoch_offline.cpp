#include "sbddc/stoch_offline.hpp"

#include <chrono>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "sbddc/bddc.hpp"
#include "sbddc/errors.hpp"
#include "sbddc/krylov.hpp"

namespace sbddc {

GalerkinTensor::GalerkinTensor(const MultiIndexSet& set_d, const MultiIndexSet& set_2d)
    : n_xi_(set_d.size()) {
  if (set_d.dim() != set_2d.dim() || set_d.degree() > set_2d.degree())
    throw ConfigError("GalerkinTensor: incompatible index sets");
  const HermiteTable table(set_2d.degree());
  const int dim = set_d.dim();
  for (int l = 0; l < n_xi_; ++l) {
    for (int k = 0; k < n_xi_; ++k) {
      const auto& bl = set_d[l];
      const auto& bk = set_d[k];
      for (int a = 0; a < set_2d.size(); ++a) {
        const auto& al = set_2d[a];
        double v = 1.0;
        for (int m = 0; m < dim && v != 0.0; ++m) v *= table(al[m], bk[m], bl[m]);
        if (v != 0.0) entries_.push_back({l, k, a, v});
      }
    }
  }
}

SgBlockSystem::SgBlockSystem(const PCMatrix& a_2d, IndexSetPtr set_d, bool force_cg, int dense_limit)
    : set_d_(std::move(set_d)),
      a_(a_2d),
      n_(a_2d.rows()),
      tensor_(*set_d_, *a_2d.set),
      dense_(!force_cg && static_cast<long>(set_d_->size()) * a_2d.rows() <= dense_limit) {
  if (a_2d.rows() != a_2d.cols()) throw ConfigError("SgBlockSystem: blocks must be square");
  if (dense_) {
    note_factorization(size());
    llt_.compute(matrix());
    if (llt_.info() != Eigen::Success) throw SpdFailure("stochastic Galerkin block system is not positive definite");
  } else {
    mean_llt_.compute(a_.coeffs[0]);
    if (mean_llt_.info() != Eigen::Success) throw SpdFailure("mean block of the Galerkin system is not positive definite");
  }
}

Eigen::MatrixXd SgBlockSystem::matrix() const {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(size(), size());
  for (const auto& e : tensor_.entries())
    k.block(e.l * n_, e.k * n_, n_, n_) += e.value * a_.coeffs[e.alpha];
  return k;
}

Eigen::MatrixXd SgBlockSystem::multiply(const Eigen::MatrixXd& y) const {
  if (y.rows() != size()) throw ConfigError("SgBlockSystem::multiply: size mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(y.rows(), y.cols());
  for (const auto& e : tensor_.entries())
    out.middleRows(e.l * n_, n_).noalias() += e.value * (a_.coeffs[e.alpha] * y.middleRows(e.k * n_, n_));
  return out;
}

PCMatrix SgBlockSystem::solve(const PCMatrix& rhs) const {
  if (rhs.terms() != n_xi() || rhs.rows() != n_) throw ConfigError("SgBlockSystem::solve: rhs shape mismatch");
  const int c = rhs.cols();
  Eigen::MatrixXd v(size(), c);
  for (int k = 0; k < n_xi(); ++k) v.middleRows(k * n_, n_) = rhs.coeffs[k];

  Eigen::MatrixXd y(size(), c);
  if (dense_) {
    y = llt_.solve(v);
  } else {
    const LinearMap op = [this](const Eigen::VectorXd& x) -> Eigen::VectorXd { return multiply(x); };
    const LinearMap pre = [this](const Eigen::VectorXd& r) -> Eigen::VectorXd {
      Eigen::VectorXd z(r.size());
      for (int k = 0; k < n_xi(); ++k) z.segment(k * n_, n_) = mean_llt_.solve(r.segment(k * n_, n_));
      return z;
    };
    for (int j = 0; j < c; ++j) {
      const PcgReport rep = pcg(op, pre, v.col(j), {1e-13, 20 * size()});
      if (!rep.converged) throw NumericalError("SgBlockSystem: CG did not converge");
      y.col(j) = rep.solution;
    }
  }
  PCMatrix out(set_d_, n_, c);
  for (int k = 0; k < n_xi(); ++k) out.coeffs[k] = y.middleRows(k * n_, n_);
  return out;
}

PCMatrix SgBlockSystem::galerkin_product(const PCMatrix& b_2d, const PCMatrix& y) const {
  if (b_2d.terms() < a_.terms() || b_2d.cols() != n_ || y.terms() != n_xi() || y.rows() != n_)
    throw ConfigError("galerkin_product: shape mismatch");
  PCMatrix out(set_d_, b_2d.rows(), y.cols());
  for (const auto& e : tensor_.entries())
    out.coeffs[e.l].noalias() += e.value * (b_2d.coeffs[e.alpha] * y.coeffs[e.k]);
  return out;
}

PCMatrix symmetrized(const PCMatrix& p) {
  PCMatrix out = p;
  for (auto& c : out.coeffs) c = 0.5 * (c + c.transpose()).eval();
  return out;
}

namespace {
PCMatrix negated(PCMatrix p) {
  for (auto& c : p.coeffs) c = -c;
  return p;
}
}  // namespace

PCMatrix sg_inverse(const SgBlockSystem& sys) {
  PCMatrix rhs(sys.set(), sys.block(), sys.block());
  rhs.coeffs[0].setIdentity();
  return symmetrized(sys.solve(rhs));
}

PCMatrix sg_X(const SgBlockSystem& sys, const PCMatrix& a_cr_2d) {
  if (a_cr_2d.rows() == 0) return PCMatrix(sys.set(), sys.block(), 0);
  return sys.solve(a_cr_2d.truncated(sys.set()).transposed());
}

CoarsePc sg_Z_and_SPi(const SgBlockSystem& sys, const PCMatrix& a_cr_2d, const PCMatrix& x,
                      const PCMatrix& a_cc_d) {
  CoarsePc out;
  out.z = symmetrized(sys.galerkin_product(a_cr_2d, x));
  out.s_pi = a_cc_d.truncated(sys.set()) + negated(out.z);
  return out;
}

SchurPc sg_schur_pc(const SgBlockSystem& sys_ii, const PCMatrix& full_2d, int n_i) {
  const int ng = full_2d.rows() - n_i;
  if (sys_ii.block() != n_i || ng < 0) throw ConfigError("sg_schur_pc: interior size mismatch");
  const PCMatrix a_gi = pc_block(full_2d, n_i, 0, ng, n_i);
  SchurPc out;
  out.a_gg = pc_block(full_2d, n_i, n_i, ng, ng).truncated(sys_ii.set());
  out.x_i = sys_ii.solve(a_gi.truncated(sys_ii.set()).transposed());
  out.z = symmetrized(sys_ii.galerkin_product(a_gi, out.x_i));
  out.s_gamma = out.a_gg + negated(out.z);
  return out;
}

std::vector<PCMatrix> sc_project(IndexSetPtr set_d, int q,
                                 const std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>& fn) {
  if (q < 1) throw ConfigError("sc_project: q must be at least 1");
  const int dim = set_d->dim();
  const GaussHermiteRule rule = gauss_hermite(q);
  std::vector<PCMatrix> out;
  std::vector<int> idx(dim, 0);
  Eigen::VectorXd xi(dim);
  while (true) {
    double w = 1.0;
    for (int m = 0; m < dim; ++m) {
      xi[m] = rule.nodes[idx[m]];
      w *= rule.weights[idx[m]];
    }
    const Eigen::VectorXd psi = basis_values(*set_d, xi);
    const auto vals = fn(xi);
    if (out.empty())
      for (const auto& v : vals) out.emplace_back(set_d, static_cast<int>(v.rows()), static_cast<int>(v.cols()));
    for (std::size_t j = 0; j < vals.size(); ++j)
      for (int a = 0; a < set_d->size(); ++a) out[j].coeffs[a].noalias() += (w * psi[a]) * vals[j];
    int m = 0;
    while (m < dim && ++idx[m] == q) idx[m++] = 0;
    if (m == dim) break;
  }
  return out;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
  if (s.size() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
  Eigen::VectorXd lam = es.eigenvalues();
  const double scale = lam.cwiseAbs().maxCoeff();
  for (int k = 0; k < lam.size(); ++k) {
    if (lam[k] < -1e-10 * scale) throw NumericalError("psd_sqrt: matrix has a negative eigenvalue");
    lam[k] = std::sqrt(std::max(lam[k], 0.0));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

ScComponents sc_build(const Mesh& mesh, const DofPartition& dofs, int s, const KLBasis& basis,
                      IndexSetPtr set_d, int q, bool with_interior) {
  if (basis.count() != set_d->dim()) throw ConfigError("sc_build: basis count differs from the index set dimension");
  auto realize = [&](const Eigen::VectorXd& xi) {
    const Eigen::VectorXd kappa = evaluate_coefficient(basis, xi);
    const SubdomainBlocks b =
        split_blocks(assemble_subdomain(mesh, dofs, s, {kappa.data(), static_cast<std::size_t>(kappa.size())}), dofs, s);
    Eigen::LLT<Eigen::MatrixXd> llt(b.A_rr());
    if (llt.info() != Eigen::Success) throw SpdFailure("sc_build: A_rr realization is not positive definite", {s});
    const Eigen::MatrixXd x = llt.solve(b.A_cr().transpose());
    std::vector<Eigen::MatrixXd> out;
    out.push_back(llt.matrixU());
    out.push_back(psd_sqrt(b.A_cc() - b.A_cr() * x));
    if (with_interior) {
      Eigen::LLT<Eigen::MatrixXd> lii(b.A_II());
      if (lii.info() != Eigen::Success) throw SpdFailure("sc_build: A_II realization is not positive definite", {s});
      out.push_back(lii.matrixU());
    }
    return out;
  };
  auto parts = sc_project(std::move(set_d), q, realize);
  ScComponents c;
  c.r_rr = std::move(parts[0]);
  c.h_pi = std::move(parts[1]);
  if (with_interior) c.r_ii = std::move(parts[2]);
  return c;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::Mpc: return "mpc";
    case Method::Sg: return "sg";
    case Method::Sc: return "sc";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "exact") return Method::Exact;
  if (s == "mpc") return Method::Mpc;
  if (s == "sg") return Method::Sg;
  if (s == "sc") return Method::Sc;
  throw ConfigError("unknown method '" + s + "' (expected exact, mpc, sg or sc)");
}

namespace {

void build_sg_class(const Mesh& mesh, const DofPartition& dofs, const OfflineStore& store,
                    const std::vector<int>& members, const Eigen::VectorXd& load, ClassComponents& cc,
                    std::vector<RhsPc>& rhs) {
  const int s = cc.representative;
  const auto& sd = dofs.subdomain(s);
  const int ni = sd.n_interior, nd = sd.n_dual, np = sd.n_primal, nr = sd.n_r();
  const auto& o = store.options;
  const IndexSetPtr set_2d = multi_index_set(o.nkl, 2 * o.degree);
  const PCMatrix full = assemble_pc_matrices(mesh, dofs, s, store.basis, set_2d);
  const PCMatrix a_cr = pc_block(full, nr, 0, np, nr);
  {
    const SgBlockSystem sys(pc_block(full, 0, 0, nr, nr), store.set_d, o.force_cg, o.dense_limit);
    cc.inv_dd = pc_block(sg_inverse(sys), ni, ni, nd, nd);
    const PCMatrix x = sg_X(sys, a_cr);
    cc.x_d = pc_block(x, ni, 0, nd, np);
    cc.s_pi = sg_Z_and_SPi(sys, a_cr, x, pc_block(full, nr, nr, np, np)).s_pi;
  }
  if (!o.surrogate) return;
  const SgBlockSystem sys_ii(pc_block(full, 0, 0, ni, ni), store.set_d, o.force_cg, o.dense_limit);
  const SchurPc sp = sg_schur_pc(sys_ii, full, ni);
  cc.s_gamma = sp.s_gamma;
  cc.x_i = sp.x_i;
  const PCMatrix a_gi = pc_block(full, ni, 0, sd.n_gamma(), ni);
  for (int t : members) {
    PCMatrix f(store.set_d, ni, 1);
    f.coeffs[0] = gather_local(dofs.subdomain(t), load).head(ni);
    rhs[t].y_f = sys_ii.solve(f);
    rhs[t].z_f = sys_ii.galerkin_product(a_gi, rhs[t].y_f);
  }
}

void build_sc_class(const Mesh& mesh, const DofPartition& dofs, const OfflineStore& store, ClassComponents& cc) {
  const int s = cc.representative;
  const auto& sd = dofs.subdomain(s);
  const auto& o = store.options;
  ScComponents c = sc_build(mesh, dofs, s, store.basis, store.set_d, o.quad_points(), o.surrogate);
  cc.r_rr = std::move(c.r_rr);
  cc.h_pi = std::move(c.h_pi);
  const PCMatrix full = assemble_pc_matrices(mesh, dofs, s, store.basis, store.set_d);
  cc.a_cr = pc_block(full, sd.n_r(), 0, sd.n_primal, sd.n_r());
  if (!o.surrogate) return;
  cc.r_ii = std::move(c.r_ii);
  cc.a_gi = pc_block(full, sd.n_interior, 0, sd.n_gamma(), sd.n_interior);
  cc.a_gg = pc_block(full, sd.n_interior, sd.n_interior, sd.n_gamma(), sd.n_gamma());
}

}  // namespace

OfflineStore build_offline(const Mesh& mesh, const DofPartition& dofs, const CovarianceSpec& spec,
                           const OfflineOptions& opts, const Eigen::VectorXd& load) {
  if (opts.method != Method::Sg && opts.method != Method::Sc)
    throw ConfigError("build_offline: only the sg and sc methods have an offline stage");
  if (opts.nkl < 1 || opts.degree < 0 || opts.quad < 0) throw ConfigError("build_offline: invalid nkl, degree or quad");
  if (opts.surrogate && opts.method == Method::Sg && load.size() != dofs.num_free())
    throw ConfigError("build_offline: the SG surrogate operator needs the load vector");
  const auto t0 = std::chrono::steady_clock::now();

  OfflineStore store;
  store.options = opts;
  store.spec = spec;
  store.ns = mesh.ns();
  store.n = mesh.n();
  store.basis = local_kl(mesh, 0, spec, opts.nkl);
  store.set_d = multi_index_set(opts.nkl, opts.degree);

  std::map<int, int> by_signature;
  std::vector<std::vector<int>> members;
  store.class_of.resize(mesh.num_subdomains());
  for (int s = 0; s < mesh.num_subdomains(); ++s) {
    auto [it, fresh] = by_signature.emplace(mesh.boundary_signature(s), static_cast<int>(store.classes.size()));
    if (fresh) {
      store.classes.emplace_back();
      store.classes.back().representative = s;
      members.emplace_back();
    }
    store.class_of[s] = it->second;
    members[it->second].push_back(s);
  }
  if (opts.surrogate && opts.method == Method::Sg) store.rhs.resize(mesh.num_subdomains());

  for (std::size_t c = 0; c < store.classes.size(); ++c) {
    if (opts.method == Method::Sg)
      build_sg_class(mesh, dofs, store, members[c], load, store.classes[c], store.rhs);
    else
      build_sc_class(mesh, dofs, store, store.classes[c]);
  }
  store.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return store;
}

}  // namespace sbddc
