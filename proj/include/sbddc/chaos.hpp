#pragma once

#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sbddc {

using MultiIndex = std::vector<int>;

/// All multi-indices alpha in N_0^dim with |alpha| <= degree. Ordered by
/// total degree, then lexicographically descending within a degree, so
/// index 0 is the zero multi-index and the set of degree d is a prefix of
/// the set of degree 2d.
class MultiIndexSet {
 public:
  MultiIndexSet(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const MultiIndex& operator[](int k) const { return indices_[k]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  /// Position of alpha, or -1 if |alpha| > degree.
  int find(const MultiIndex& alpha) const;
  /// Number of indices with total degree <= d.
  int prefix_size(int d) const;

 private:
  int dim_;
  int degree_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, int> lookup_;
};

using IndexSetPtr = std::shared_ptr<const MultiIndexSet>;

IndexSetPtr multi_index_set(int m, int d);

/// Orthonormal probabilists' Hermite polynomial psi_k(x).
double hermite_eval(int k, double x);
/// psi_0(x) ... psi_kmax(x).
Eigen::VectorXd hermite_all(int kmax, double x);

/// <psi_i psi_j psi_k> under the standard normal measure.
double univariate_triple_product(int i, int j, int k);

/// Table of univariate triple products for indices up to max_degree.
class HermiteTable {
 public:
  explicit HermiteTable(int max_degree);
  int max_degree() const { return max_degree_; }
  double operator()(int i, int j, int k) const {
    return table_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k];
  }

 private:
  int max_degree_;
  int n_;
  std::vector<double> table_;
};

/// <psi_alpha psi_beta psi_gamma> as a product of univariate factors.
double triple_product(std::span<const int> alpha, std::span<const int> beta,
                      std::span<const int> gamma);

/// <exp(c xi) psi_k(xi)> = exp(c^2 / 2) c^k / sqrt(k!).
double lognormal_pc_coeff(double c, int k);

/// psi_alpha(xi) for every alpha in the set.
Eigen::VectorXd basis_values(const MultiIndexSet& set, const Eigen::VectorXd& xi);

/// Probabilists' Gauss-Hermite rule: weights sum to one.
struct GaussHermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
GaussHermiteRule gauss_hermite(int q);

/// Matrix-valued truncated PC expansion sum_alpha A_alpha psi_alpha.
struct PCMatrix {
  IndexSetPtr set;
  std::vector<Eigen::MatrixXd> coeffs;

  PCMatrix() = default;
  PCMatrix(IndexSetPtr s, int rows, int cols);

  int rows() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs.front().rows()); }
  int cols() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs.front().cols()); }
  int terms() const { return static_cast<int>(coeffs.size()); }

  /// sum_alpha A_alpha psi_alpha(xi).
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& xi) const;
  /// Same with precomputed psi values.
  Eigen::MatrixXd evaluate_with(const Eigen::VectorXd& psi) const;
  /// Restriction to a prefix subset (lower total degree).
  PCMatrix truncated(IndexSetPtr smaller) const;
  PCMatrix transposed() const;

  PCMatrix& operator+=(const PCMatrix& other);
};

PCMatrix operator+(PCMatrix a, const PCMatrix& b);

Eigen::MatrixXd pc_evaluate(const PCMatrix& p, const Eigen::VectorXd& xihat);

}  // namespace sbddc
