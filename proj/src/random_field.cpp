#include "sbddc/random_field.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "sbddc/errors.hpp"

namespace sbddc {

double covariance(Point x, Point y, const CovarianceSpec& spec) {
  const double dx = x.x - y.x;
  const double dy = x.y - y.y;
  return spec.sigma2 * std::exp(-(dx * dx + dy * dy) / spec.ell);
}

double KLBasis::energy_fraction(int k) const {
  k = std::min(k, count());
  return lambdas.head(k).sum() / total_variance;
}

namespace {

void validate(const CovarianceSpec& spec) {
  if (!(spec.sigma2 > 0.0) || !(spec.ell > 0.0))
    throw ConfigError("covariance: sigma2 and ell must be positive");
}

// Flips each column so that its entry of largest magnitude is positive.
void fix_signs(Eigen::MatrixXd& modes) {
  for (int j = 0; j < modes.cols(); ++j) {
    Eigen::Index imax = 0;
    modes.col(j).cwiseAbs().maxCoeff(&imax);
    if (modes(imax, j) < 0.0) modes.col(j) = -modes.col(j);
  }
}

KLBasis finish_basis(const Eigen::VectorXd& lambdas, const Eigen::MatrixXd& vectors,
                     const Eigen::VectorXd& weights, const CovarianceSpec& spec) {
  KLBasis basis;
  basis.lambdas = lambdas;
  basis.weights = weights;
  basis.modes = weights.cwiseSqrt().cwiseInverse().asDiagonal() * vectors;
  fix_signs(basis.modes);
  basis.total_variance = spec.sigma2 * weights.sum();
  return basis;
}

}  // namespace

KLBasis discrete_kl(std::span<const Point> centroids, std::span<const double> weights,
                    const CovarianceSpec& spec, int m) {
  validate(spec);
  const int n = static_cast<int>(centroids.size());
  if (static_cast<int>(weights.size()) != n) throw ConfigError("discrete_kl: size mismatch");
  if (m < 0 || m > n) throw ConfigError("discrete_kl: truncation exceeds number of cells");

  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = weights[i];
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd B(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      const double v = sw[i] * covariance(centroids[i], centroids[j], spec) * sw[j];
      B(i, j) = v;
      B(j, i) = v;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  if (es.info() != Eigen::Success) throw NumericalError("discrete_kl: eigensolver did not converge");
  // Ascending order from Eigen; take the top m reversed.
  Eigen::VectorXd lambdas = es.eigenvalues().tail(m).reverse();
  Eigen::MatrixXd vectors = es.eigenvectors().rightCols(m).rowwise().reverse();
  return finish_basis(lambdas, vectors, w, spec);
}

namespace {

// Sorted unique coordinates and the position of every value in them.
std::vector<double> unique_coords(std::vector<double> values, double tol) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  for (double v : values)
    if (out.empty() || v - out.back() > tol) out.push_back(v);
  return out;
}

int locate(const std::vector<double>& grid, double v) {
  auto it = std::lower_bound(grid.begin(), grid.end(), v - 1e-9);
  return static_cast<int>(it - grid.begin());
}

Eigen::MatrixXd kernel_1d(const std::vector<double>& grid, double ell) {
  const int n = static_cast<int>(grid.size());
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double d = grid[i] - grid[j];
      K(i, j) = std::exp(-d * d / ell);
    }
  return K;
}

}  // namespace

KLBasis global_kl_matrix_free(const Mesh& mesh, const CovarianceSpec& spec, int m) {
  validate(spec);
  const int n = mesh.num_cells();
  if (m < 0 || m > n) throw ConfigError("global_kl: truncation exceeds number of cells");

  std::vector<double> xs, ys;
  xs.reserve(n);
  ys.reserve(n);
  Eigen::VectorXd w(n);
  for (int c = 0; c < n; ++c) {
    const Point p = mesh.centroid(c);
    xs.push_back(p.x);
    ys.push_back(p.y);
    w[c] = mesh.cell(c).area;
  }
  const double tol = 1e-6 * mesh.h();
  const auto gx = unique_coords(xs, tol);
  const auto gy = unique_coords(ys, tol);
  std::vector<int> px(n), py(n);
  for (int c = 0; c < n; ++c) {
    px[c] = locate(gx, xs[c]);
    py[c] = locate(gy, ys[c]);
  }
  const Eigen::MatrixXd Kx = kernel_1d(gx, spec.ell);
  const Eigen::MatrixXd Ky = kernel_1d(gy, spec.ell);
  const Eigen::VectorXd sw = w.cwiseSqrt();

  // y = W^{1/2} C W^{1/2} x, via C = sigma2 * (Kx (x) Ky) restricted to the centroids.
  auto apply = [&](const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Y(n, X.cols());
    Eigen::MatrixXd G(gy.size(), gx.size());
    for (int j = 0; j < X.cols(); ++j) {
      G.setZero();
      for (int c = 0; c < n; ++c) G(py[c], px[c]) += sw[c] * X(c, j);
      const Eigen::MatrixXd R = Ky * G * Kx;
      for (int c = 0; c < n; ++c) Y(c, j) = spec.sigma2 * sw[c] * R(py[c], px[c]);
    }
    return Y;
  };

  const int k = std::min(n, m + std::max(10, m));
  std::mt19937_64 gen(0x5eedULL);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd Q(n, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) Q(i, j) = nd(gen);
  Q = Eigen::HouseholderQR<Eigen::MatrixXd>(Q).householderQ() * Eigen::MatrixXd::Identity(n, k);

  Eigen::VectorXd theta;
  Eigen::MatrixXd V;
  constexpr int max_iterations = 500;
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::MatrixXd Y = apply(Q);
    Eigen::MatrixXd H = Q.transpose() * Y;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    theta = es.eigenvalues().reverse();
    const Eigen::MatrixXd S = es.eigenvectors().rowwise().reverse();
    V = Q * S;
    const Eigen::MatrixXd BV = Y * S;
    double worst = 0.0;
    for (int j = 0; j < m; ++j) worst = std::max(worst, (BV.col(j) - theta[j] * V.col(j)).norm());
    if (m == 0 || worst <= 1e-11 * theta[0]) {
      return finish_basis(theta.head(m), V.leftCols(m), w, spec);
    }
    Q = Eigen::HouseholderQR<Eigen::MatrixXd>(BV).householderQ() * Eigen::MatrixXd::Identity(n, k);
  }
  throw NumericalError("global_kl: subspace iteration did not converge");
}

KLBasis global_kl(const Mesh& mesh, const CovarianceSpec& spec, int m) {
  constexpr int dense_limit = 1024;
  if (mesh.num_cells() > dense_limit) return global_kl_matrix_free(mesh, spec, m);
  std::vector<Point> pts;
  std::vector<double> w;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    pts.push_back(mesh.centroid(c));
    w.push_back(mesh.cell(c).area);
  }
  return discrete_kl(pts, w, spec, m);
}

KLBasis local_kl(const Mesh& mesh, int s, const CovarianceSpec& spec, int m) {
  const Point origin = mesh.subdomain_origin(s);
  std::vector<Point> pts;
  std::vector<double> w;
  for (int c : mesh.subdomain_cells(s)) {
    const Point p = mesh.centroid(c);
    pts.push_back({p.x - origin.x, p.y - origin.y});
    w.push_back(mesh.cell(c).area);
  }
  return discrete_kl(pts, w, spec, m);
}

SampleVector sample_xi(std::uint64_t seed, int m) {
  if (m < 1) throw ConfigError("sample_xi: m must be positive");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  SampleVector s{seed, Eigen::VectorXd(m)};
  for (int i = 0; i < m; ++i) s.xi[i] = nd(gen);
  return s;
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::uint64_t k) {
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::VectorXd evaluate_field(const KLBasis& basis, const Eigen::VectorXd& xi) {
  if (xi.size() != basis.count()) throw ConfigError("evaluate_field: xi length mismatch");
  return basis.modes * (basis.lambdas.cwiseMax(0.0).cwiseSqrt().cwiseProduct(xi));
}

Eigen::VectorXd evaluate_coefficient(const KLBasis& basis, const Eigen::VectorXd& xi) {
  return evaluate_field(basis, xi).array().exp();
}

Eigen::VectorXd local_coordinates(const Eigen::VectorXd& field, const KLBasis& basis) {
  if (field.size() != basis.num_cells()) throw ConfigError("local_coordinates: field size mismatch");
  Eigen::VectorXd xihat(basis.count());
  const double lead = basis.count() > 0 ? basis.lambdas[0] : 0.0;
  const Eigen::VectorXd wf = field.cwiseProduct(basis.weights);
  for (int m = 0; m < basis.count(); ++m) {
    const double lambda = basis.lambdas[m];
    if (!(lambda > 0.0) || lambda < 1e-13 * lead)
      throw NumericalError("local_coordinates: mode count exceeds the numerical rank of the basis");
    xihat[m] = basis.modes.col(m).dot(wf) / std::sqrt(lambda);
  }
  return xihat;
}

Eigen::VectorXd restrict_to_subdomain(const Mesh& mesh, int s, const Eigen::VectorXd& field) {
  const auto& cells = mesh.subdomain_cells(s);
  Eigen::VectorXd out(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) out[k] = field[cells[k]];
  return out;
}

}  // namespace sbddc
