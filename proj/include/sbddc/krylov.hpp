#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "sbddc/errors.hpp"

namespace sbddc {

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// p^T A p <= 0 during PCG.
class IndefiniteOperator : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// <r, z> <= 0 during PCG.
class IndefinitePreconditioner : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

struct PcgOptions {
  double tol = 1e-8;
  int maxit = 100;
};

struct PcgReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // ||r_k|| / ||r_0||, k = 1..iterations
  double lambda_min = 1.0;
  double lambda_max = 1.0;
  double cond = 1.0;
  Eigen::VectorXd solution;
};

/// Preconditioned CG from a zero initial guess. Stops once the
/// unpreconditioned residual has dropped by tol relative to the right-hand
/// side. The extreme eigenvalues of the preconditioned operator are
/// estimated from the Lanczos tridiagonal built from the CG coefficients.
PcgReport pcg(const LinearMap& A, const LinearMap& M, const Eigen::VectorXd& b,
              const PcgOptions& opts = {});

/// Extreme eigenvalues of the Lanczos matrix for CG step lengths alpha and
/// direction updates beta (beta.size() >= alpha.size() - 1).
std::pair<double, double> lanczos_extremes(const std::vector<double>& alpha,
                                           const std::vector<double>& beta);

}  // namespace sbddc
