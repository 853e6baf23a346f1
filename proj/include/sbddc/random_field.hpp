#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sbddc/mesh.hpp"

namespace sbddc {

/// Gaussian covariance C(x, y) = sigma2 exp(-|x - y|^2 / ell).
struct CovarianceSpec {
  double sigma2 = 0.5;
  double ell = 1.0;
};

double covariance(Point x, Point y, const CovarianceSpec& spec);

/// Discrete KL basis on a set of cells. Modes are orthonormal in the
/// area-weighted inner product and carry the sign convention that the entry
/// of largest magnitude is positive.
struct KLBasis {
  Eigen::VectorXd lambdas;  // descending
  Eigen::MatrixXd modes;    // cells x count
  Eigen::VectorXd weights;  // cell areas
  double total_variance = 0.0;  // sum of all eigenvalues of the discrete operator

  int count() const { return static_cast<int>(lambdas.size()); }
  int num_cells() const { return static_cast<int>(weights.size()); }
  /// Fraction of total_variance captured by the first k modes.
  double energy_fraction(int k) const;
};

/// Nystrom discretization at the given centroids with area weights; dense
/// symmetric eigendecomposition, truncated to m modes afterwards.
KLBasis discrete_kl(std::span<const Point> centroids, std::span<const double> weights,
                    const CovarianceSpec& spec, int m);

/// Global KL on all mesh cells. Small meshes use discrete_kl; larger ones a
/// matrix-free subspace iteration exploiting the separable kernel on the
/// tensor grid of centroid coordinates.
KLBasis global_kl(const Mesh& mesh, const CovarianceSpec& spec, int m);

/// Same as global_kl but always matrix-free (exposed for testing).
KLBasis global_kl_matrix_free(const Mesh& mesh, const CovarianceSpec& spec, int m);

/// KL of the covariance restricted to subdomain s, in the subdomain's local
/// cell order and coordinates relative to the subdomain origin.
KLBasis local_kl(const Mesh& mesh, int s, const CovarianceSpec& spec, int m);

struct SampleVector {
  std::uint64_t seed = 0;
  Eigen::VectorXd xi;
};

/// i.i.d. standard normals from a 64-bit Mersenne Twister seeded with seed.
SampleVector sample_xi(std::uint64_t seed, int m);

/// Per-sample seed for sample k of a run with base seed (splitmix64 mix).
std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t k);

/// a(cell) = sum_m sqrt(lambda_m) a_m(cell) xi_m.
Eigen::VectorXd evaluate_field(const KLBasis& basis, const Eigen::VectorXd& xi);
/// kappa = exp(a) per cell.
Eigen::VectorXd evaluate_coefficient(const KLBasis& basis, const Eigen::VectorXd& xi);

/// Linear projection of a field given on the basis cells onto the local
/// modes: xihat_m = lambda_m^{-1/2} sum_cells a(cell) a_m(cell) w(cell).
Eigen::VectorXd local_coordinates(const Eigen::VectorXd& field, const KLBasis& basis);

/// Gathers the global per-cell field on the cells of subdomain s.
Eigen::VectorXd restrict_to_subdomain(const Mesh& mesh, int s, const Eigen::VectorXd& field);

}  // namespace sbddc
