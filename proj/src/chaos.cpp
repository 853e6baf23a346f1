#include "sbddc/chaos.hpp"

#include <cmath>
#include <functional>

#include <Eigen/Eigenvalues>

#include "sbddc/errors.hpp"

namespace sbddc {

MultiIndexSet::MultiIndexSet(int dim, int degree) : dim_(dim), degree_(degree) {
  if (dim < 1 || degree < 0) throw ConfigError("multi_index_set: need m >= 1 and d >= 0");
  MultiIndex alpha(dim, 0);
  // Descending lexicographic enumeration of compositions of `total`.
  std::function<void(int, int)> fill = [&](int pos, int remaining) {
    if (pos == dim_ - 1) {
      alpha[pos] = remaining;
      lookup_.emplace(alpha, static_cast<int>(indices_.size()));
      indices_.push_back(alpha);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      alpha[pos] = v;
      fill(pos + 1, remaining - v);
    }
  };
  for (int total = 0; total <= degree; ++total) fill(0, total);
}

int MultiIndexSet::find(const MultiIndex& alpha) const {
  auto it = lookup_.find(alpha);
  return it == lookup_.end() ? -1 : it->second;
}

int MultiIndexSet::prefix_size(int d) const {
  // binomial(dim + d, d)
  double b = 1.0;
  for (int k = 1; k <= d; ++k) b = b * (dim_ + k) / k;
  return static_cast<int>(std::llround(b));
}

IndexSetPtr multi_index_set(int m, int d) { return std::make_shared<const MultiIndexSet>(m, d); }

double hermite_eval(int k, double x) {
  if (k < 0) throw ConfigError("hermite_eval: negative degree");
  double prev = 0.0;
  double cur = 1.0;
  for (int j = 0; j < k; ++j) {
    const double next = (x * cur - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(j + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

Eigen::VectorXd hermite_all(int kmax, double x) {
  Eigen::VectorXd v(kmax + 1);
  v[0] = 1.0;
  if (kmax >= 1) v[1] = x;
  for (int j = 1; j < kmax; ++j)
    v[j + 1] = (x * v[j] - std::sqrt(static_cast<double>(j)) * v[j - 1]) / std::sqrt(j + 1.0);
  return v;
}

double univariate_triple_product(int i, int j, int k) {
  const int total = i + j + k;
  if (total % 2 != 0) return 0.0;
  const int s = total / 2;
  if (s < i || s < j || s < k) return 0.0;
  const double log_value = 0.5 * (std::lgamma(i + 1.0) + std::lgamma(j + 1.0) + std::lgamma(k + 1.0)) -
                           std::lgamma(s - i + 1.0) - std::lgamma(s - j + 1.0) -
                           std::lgamma(s - k + 1.0);
  return std::exp(log_value);
}

HermiteTable::HermiteTable(int max_degree) : max_degree_(max_degree), n_(max_degree + 1) {
  table_.resize(static_cast<std::size_t>(n_) * n_ * n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        table_[(static_cast<std::size_t>(i) * n_ + j) * n_ + k] = univariate_triple_product(i, j, k);
}

double triple_product(std::span<const int> alpha, std::span<const int> beta,
                      std::span<const int> gamma) {
  if (alpha.size() != beta.size() || alpha.size() != gamma.size())
    throw ConfigError("triple_product: dimension mismatch");
  double value = 1.0;
  for (std::size_t l = 0; l < alpha.size() && value != 0.0; ++l)
    value *= univariate_triple_product(alpha[l], beta[l], gamma[l]);
  return value;
}

double lognormal_pc_coeff(double c, int k) {
  if (k < 0) throw ConfigError("lognormal_pc_coeff: negative degree");
  if (k == 0) return std::exp(0.5 * c * c);
  if (c == 0.0) return 0.0;
  const double sign = (c < 0.0 && k % 2 == 1) ? -1.0 : 1.0;
  return sign * std::exp(0.5 * c * c + k * std::log(std::abs(c)) - 0.5 * std::lgamma(k + 1.0));
}

Eigen::VectorXd basis_values(const MultiIndexSet& set, const Eigen::VectorXd& xi) {
  if (xi.size() != set.dim()) throw ConfigError("basis_values: xi has the wrong dimension");
  std::vector<Eigen::VectorXd> uni(set.dim());
  for (int l = 0; l < set.dim(); ++l) uni[l] = hermite_all(set.degree(), xi[l]);
  Eigen::VectorXd psi(set.size());
  for (int a = 0; a < set.size(); ++a) {
    double v = 1.0;
    const auto& alpha = set[a];
    for (int l = 0; l < set.dim(); ++l) v *= uni[l][alpha[l]];
    psi[a] = v;
  }
  return psi;
}

GaussHermiteRule gauss_hermite(int q) {
  if (q < 1) throw ConfigError("gauss_hermite: need at least one point");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    jac(k, k - 1) = std::sqrt(static_cast<double>(k));
    jac(k - 1, k) = jac(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussHermiteRule rule{es.eigenvalues(), Eigen::VectorXd(q)};
  for (int i = 0; i < q; ++i) rule.weights[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  return rule;
}

PCMatrix::PCMatrix(IndexSetPtr s, int rows, int cols) : set(std::move(s)) {
  coeffs.assign(set->size(), Eigen::MatrixXd::Zero(rows, cols));
}

Eigen::MatrixXd PCMatrix::evaluate(const Eigen::VectorXd& xi) const {
  return evaluate_with(basis_values(*set, xi));
}

Eigen::MatrixXd PCMatrix::evaluate_with(const Eigen::VectorXd& psi) const {
  if (psi.size() != terms()) throw ConfigError("PCMatrix: basis value count mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows(), cols());
  for (int a = 0; a < terms(); ++a) out.noalias() += psi[a] * coeffs[a];
  return out;
}

PCMatrix PCMatrix::truncated(IndexSetPtr smaller) const {
  if (smaller->dim() != set->dim() || smaller->degree() > set->degree())
    throw ConfigError("PCMatrix::truncated: target set is not a prefix");
  PCMatrix out;
  out.set = smaller;
  out.coeffs.assign(coeffs.begin(), coeffs.begin() + smaller->size());
  return out;
}

PCMatrix PCMatrix::transposed() const {
  PCMatrix out;
  out.set = set;
  out.coeffs.reserve(coeffs.size());
  for (const auto& c : coeffs) out.coeffs.push_back(c.transpose());
  return out;
}

PCMatrix& PCMatrix::operator+=(const PCMatrix& other) {
  if (other.terms() != terms()) throw ConfigError("PCMatrix: adding expansions over different sets");
  for (int a = 0; a < terms(); ++a) coeffs[a] += other.coeffs[a];
  return *this;
}

PCMatrix operator+(PCMatrix a, const PCMatrix& b) { return a += b; }

Eigen::MatrixXd pc_evaluate(const PCMatrix& p, const Eigen::VectorXd& xihat) {
  if (xihat.size() != p.set->dim()) throw ConfigError("pc_evaluate: dimension mismatch");
  return p.evaluate(xihat);
}

}  // namespace sbddc
