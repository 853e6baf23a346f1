#include "sbddc/krylov.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace sbddc {

std::pair<double, double> lanczos_extremes(const std::vector<double>& alpha,
                                           const std::vector<double>& beta) {
  const int k = static_cast<int>(alpha.size());
  if (k == 0) return {1.0, 1.0};
  Eigen::VectorXd diag(k);
  Eigen::VectorXd off(std::max(k - 1, 0));
  for (int j = 0; j < k; ++j) {
    diag[j] = 1.0 / alpha[j];
    if (j > 0) diag[j] += beta[j - 1] / alpha[j - 1];
    if (j + 1 < k) off[j] = std::sqrt(beta[j]) / alpha[j];
  }
  if (k == 1) return {diag[0], diag[0]};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()[0], es.eigenvalues()[k - 1]};
}

PcgReport pcg(const LinearMap& A, const LinearMap& M, const Eigen::VectorXd& b,
              const PcgOptions& opts) {
  if (!(opts.tol > 0.0) || opts.maxit < 0) throw ConfigError("pcg: tol must be positive and maxit nonnegative");
  PcgReport rep;
  rep.solution = Eigen::VectorXd::Zero(b.size());
  const double r0 = b.norm();
  if (r0 == 0.0) {
    rep.converged = true;
    return rep;
  }
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = M(r);
  double rz = r.dot(z);
  if (!(rz > 0.0)) throw IndefinitePreconditioner("pcg: preconditioner is not positive definite");
  Eigen::VectorXd p = z;
  std::vector<double> alphas, betas;

  for (int it = 0; it < opts.maxit; ++it) {
    const Eigen::VectorXd q = A(p);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw IndefiniteOperator("pcg: operator is not positive definite");
    const double alpha = rz / pq;
    alphas.push_back(alpha);
    rep.solution += alpha * p;
    r -= alpha * q;
    ++rep.iterations;
    const double rel = r.norm() / r0;
    rep.residual_history.push_back(rel);
    if (rel <= opts.tol) {
      rep.converged = true;
      break;
    }
    z = M(r);
    const double rz_new = r.dot(z);
    if (!(rz_new > 0.0)) throw IndefinitePreconditioner("pcg: preconditioner is not positive definite");
    const double beta = rz_new / rz;
    betas.push_back(beta);
    rz = rz_new;
    p = z + beta * p;
  }

  const auto [lo, hi] = lanczos_extremes(alphas, betas);
  rep.lambda_min = lo;
  rep.lambda_max = hi;
  rep.cond = hi / lo;
  return rep;
}

}  // namespace sbddc
