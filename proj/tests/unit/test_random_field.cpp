#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "sbddc/errors.hpp"
#include "sbddc/random_field.hpp"

using namespace sbddc;

namespace {

std::vector<Point> centroids(const Mesh& m) {
  std::vector<Point> c;
  for (int k = 0; k < m.num_cells(); ++k) c.push_back(m.centroid(k));
  return c;
}

std::vector<double> areas(const Mesh& m) {
  std::vector<double> a;
  for (const auto& c : m.cells()) a.push_back(c.area);
  return a;
}

void check_basis_invariants(const KLBasis& b) {
  for (int k = 1; k < b.count(); ++k) CHECK(b.lambdas[k - 1] >= b.lambdas[k]);
  CHECK(b.lambdas[b.count() - 1] >= -1e-14 * b.lambdas[0]);
  const Eigen::MatrixXd G = b.modes.transpose() * b.weights.asDiagonal() * b.modes;
  CHECK((G - Eigen::MatrixXd::Identity(b.count(), b.count())).cwiseAbs().maxCoeff() < 1e-10);
  for (int k = 0; k < b.count(); ++k) {
    Eigen::Index i;
    b.modes.col(k).cwiseAbs().maxCoeff(&i);
    CHECK(b.modes(i, k) > 0.0);
  }
}

}  // namespace

TEST_CASE("covariance kernel") {
  const CovarianceSpec s{0.5, 1.0};
  CHECK(covariance({0.3, 0.4}, {0.3, 0.4}, s) == 0.5);
  CHECK(covariance({0.0, 0.0}, {1.0, 0.0}, s) == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(covariance({0.1, 0.7}, {0.9, 0.2}, s) == covariance({0.9, 0.2}, {0.1, 0.7}, s));
  const CovarianceSpec t{2.0, 0.1};
  CHECK(covariance({0.0, 0.0}, {0.3, 0.4}, t) == doctest::Approx(2.0 * std::exp(-0.25 / 0.1)));
}

TEST_CASE("discrete KL: trace identity and basis invariants") {
  const Mesh m(2, 3);
  const auto c = centroids(m);
  const auto a = areas(m);
  const CovarianceSpec s{0.5, 1.0};
  const KLBasis full = discrete_kl(c, a, s, m.num_cells());
  CHECK(full.lambdas.sum() == doctest::Approx(0.5 * 1.0).epsilon(1e-8));
  CHECK(full.total_variance == doctest::Approx(0.5).epsilon(1e-14));
  check_basis_invariants(full);

  const KLBasis four = discrete_kl(c, a, s, 4);
  CHECK(four.count() == 4);
  CHECK((four.lambdas - full.lambdas.head(4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(four.energy_fraction(4) == doctest::Approx(full.lambdas.head(4).sum() / full.lambdas.sum()).epsilon(1e-12));
  CHECK_THROWS_AS(discrete_kl(c, a, s, m.num_cells() + 1), ConfigError);
}

TEST_CASE("discrete KL is invariant under cell reordering") {
  const Mesh m(2, 2);
  auto c = centroids(m);
  auto a = areas(m);
  const CovarianceSpec s{0.5, 0.3};
  const KLBasis b1 = discrete_kl(c, a, s, 6);
  std::vector<int> perm(c.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937 rng(7);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Point> c2;
  std::vector<double> a2;
  for (int p : perm) {
    c2.push_back(c[p]);
    a2.push_back(a[p]);
  }
  const KLBasis b2 = discrete_kl(c2, a2, s, 6);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(b2.lambdas[k] - b1.lambdas[k]) <= 1e-8 * b1.lambdas[k]);
}

TEST_CASE("matrix-free global KL agrees with the dense solver") {
  const Mesh m(4, 4);
  for (double ell : {1.0, 0.1}) {
    const CovarianceSpec s{0.5, ell};
    const KLBasis dense = discrete_kl(centroids(m), areas(m), s, 6);
    const KLBasis mf = global_kl_matrix_free(m, s, 6);
    check_basis_invariants(mf);
    CHECK(mf.total_variance == doctest::Approx(dense.total_variance).epsilon(1e-14));
    for (int k = 0; k < 6; ++k) CHECK(std::abs(mf.lambdas[k] - dense.lambdas[k]) <= 1e-9 * dense.lambdas[0]);
    // each mode lies in the span of the dense modes of its eigenvalue cluster
    for (int k = 0; k < 6; ++k) {
      Eigen::VectorXd r = mf.modes.col(k);
      for (int j = 0; j < 6; ++j) {
        if (std::abs(dense.lambdas[j] - dense.lambdas[k]) > 1e-2 * dense.lambdas[k]) continue;
        r -= dense.modes.col(j) * dense.modes.col(j).dot(dense.weights.asDiagonal() * mf.modes.col(k));
      }
      CHECK(std::sqrt(r.dot(dense.weights.asDiagonal() * r)) < 1e-6);
    }
  }
}

TEST_CASE("paper KL energy fractions, l = 1") {
  const CovarianceSpec s{0.5, 1.0};
  const Mesh m128(16, 8);
  CHECK(std::abs(global_kl(m128, s, 4).energy_fraction(4) - 0.982) <= 0.005);
  const Mesh m64(8, 8);
  CHECK(std::abs(local_kl(m64, 0, s, 1).energy_fraction(1) - 0.995) <= 0.005);
  CHECK(local_kl(m128, 0, s, 1).energy_fraction(1) >= 0.998);
  // 16 subdomains: 98.0%
  const Mesh m16(4, 8);
  CHECK(std::abs(local_kl(m16, 0, s, 1).energy_fraction(1) - 0.980) <= 0.0005);
}

TEST_CASE("paper KL energy fractions, l = 0.1") {
  const CovarianceSpec s{0.5, 0.1};
  const Mesh m(8, 8);
  const KLBasis g = global_kl(m, s, 15);
  // the quoted 95.8% is the fifteen-term fraction
  CHECK(std::abs(g.energy_fraction(15) - 0.958) <= 0.0005);
  CHECK(g.energy_fraction(4) < 0.7);
  MESSAGE("l=0.1: four-term fraction ", g.energy_fraction(4), ", fifteen-term fraction ", g.energy_fraction(15));
  const Mesh m16(4, 8);
  const KLBasis l16 = local_kl(m16, 0, s, 4);
  CHECK(std::abs(l16.energy_fraction(2) - 0.907) <= 0.0005);
  CHECK(std::abs(l16.energy_fraction(4) - 0.993) <= 0.0005);
  CHECK(std::abs(local_kl(m, 0, s, 3).energy_fraction(3) - 0.999) <= 0.0005);
}

TEST_CASE("local KL truncation error decreases") {
  const Mesh m(4, 6);
  const KLBasis b = local_kl(m, 5, {0.5, 0.1}, 2 * 6 * 6);
  double prev = b.total_variance;
  for (int k = 1; k <= b.count(); ++k) {
    const double tail = b.total_variance - b.lambdas.head(k).sum();
    CHECK(tail <= prev + 1e-15);
    prev = tail;
  }
  CHECK(std::abs(prev) < 1e-10);
}

TEST_CASE("local KL is the same on every subdomain") {
  const Mesh m(3, 4);
  const CovarianceSpec s{0.5, 1.0};
  const KLBasis b0 = local_kl(m, 0, s, 3);
  for (int t = 1; t < m.num_subdomains(); ++t) {
    const KLBasis bt = local_kl(m, t, s, 3);
    CHECK((bt.lambdas - b0.lambdas).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((bt.modes - b0.modes).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("sampling") {
  const auto a = sample_xi(42, 5);
  const auto b = sample_xi(42, 5);
  CHECK(a.xi == b.xi);
  CHECK(a.seed == 42);
  CHECK(sample_xi(43, 5).xi != a.xi);
  CHECK(sample_seed(1, 0) != sample_seed(1, 1));
  CHECK(sample_seed(1, 3) == sample_seed(1, 3));

  const auto big = sample_xi(2024, 100000).xi;
  const double mean = big.mean();
  const double var = (big.array() - mean).square().sum() / (big.size() - 1);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("field evaluation") {
  const Mesh m(2, 4);
  const KLBasis b = global_kl(m, {0.5, 1.0}, 4);
  CHECK(evaluate_coefficient(b, Eigen::VectorXd::Zero(4)).isApproxToConstant(1.0));
  const Eigen::VectorXd a = evaluate_field(b, Eigen::VectorXd::Unit(4, 0));
  CHECK((a - std::sqrt(b.lambdas[0]) * b.modes.col(0)).cwiseAbs().maxCoeff() < 1e-15);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Eigen::VectorXd k = evaluate_coefficient(b, sample_xi(s, 4).xi);
    CHECK(k.minCoeff() > 0.0);
  }
}

TEST_CASE("local coordinates") {
  const Mesh m(4, 4);
  const CovarianceSpec s{0.5, 1.0};
  const KLBasis loc = local_kl(m, 6, s, 3);
  CHECK(local_coordinates(Eigen::VectorXd::Zero(loc.num_cells()), loc).norm() == 0.0);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd f = std::sqrt(loc.lambdas[k]) * loc.modes.col(k);
    const Eigen::VectorXd xi = local_coordinates(f, loc);
    CHECK((xi - Eigen::VectorXd::Unit(3, k)).cwiseAbs().maxCoeff() < 1e-10);
  }
  // one subdomain: the local basis is the global one
  const Mesh one(1, 6);
  const KLBasis g = global_kl(one, s, 4);
  const KLBasis l = local_kl(one, 0, s, 4);
  const Eigen::VectorXd xi = sample_xi(5, 4).xi;
  CHECK((local_coordinates(evaluate_field(g, xi), l) - xi).cwiseAbs().maxCoeff() < 1e-10);
  // restricted global field
  const Eigen::VectorXd field = evaluate_field(global_kl(m, s, 4), xi);
  CHECK(restrict_to_subdomain(m, 6, field).size() == loc.num_cells());
  CHECK(local_coordinates(restrict_to_subdomain(m, 6, field), loc).allFinite());

  KLBasis degenerate = loc;
  degenerate.lambdas[2] = 0.0;
  CHECK_THROWS_AS(local_coordinates(Eigen::VectorXd::Ones(loc.num_cells()), degenerate), NumericalError);
}
