// Independent reference computations shared by the tests.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "sbddc/assembly.hpp"
#include "sbddc/bddc.hpp"
#include "sbddc/chaos.hpp"
#include "sbddc/mesh.hpp"

namespace oracle {

using sbddc::Point;

// 7-point degree-5 rule on the reference triangle (barycentric points, weights sum to 1).
struct TriRule {
  std::vector<std::array<double, 3>> bary;
  std::vector<double> w;
};

inline TriRule seven_point() {
  const double s15 = std::sqrt(15.0);
  const double a = (6.0 - s15) / 21.0, b = (6.0 + s15) / 21.0;
  const double wa = (155.0 - s15) / 1200.0, wb = (155.0 + s15) / 1200.0;
  TriRule r;
  r.bary = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
            {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}};
  r.w = {9.0 / 40, wa, wa, wa, wb, wb, wb};
  return r;
}

inline double area(Point p0, Point p1, Point p2) {
  return 0.5 * std::abs((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

// Integral of g over the triangle, split into 4^levels congruent pieces.
inline double integrate(Point p0, Point p1, Point p2, const std::function<double(Point)>& g, int levels) {
  if (levels > 0) {
    const Point m01{(p0.x + p1.x) / 2, (p0.y + p1.y) / 2};
    const Point m12{(p1.x + p2.x) / 2, (p1.y + p2.y) / 2};
    const Point m02{(p0.x + p2.x) / 2, (p0.y + p2.y) / 2};
    return integrate(p0, m01, m02, g, levels - 1) + integrate(m01, p1, m12, g, levels - 1) +
           integrate(m02, m12, p2, g, levels - 1) + integrate(m01, m12, m02, g, levels - 1);
  }
  static const TriRule r = seven_point();
  const double A = area(p0, p1, p2);
  double s = 0.0;
  for (std::size_t q = 0; q < r.w.size(); ++q) {
    const auto& l = r.bary[q];
    s += r.w[q] * g({l[0] * p0.x + l[1] * p1.x + l[2] * p2.x, l[0] * p0.y + l[1] * p1.y + l[2] * p2.y});
  }
  return A * s;
}

// Coefficients (c0, cx, cy) of the affine hat function equal to 1 at vertex k.
inline Eigen::Vector3d hat(const std::array<Point, 3>& p, int k) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) m.row(i) << 1.0, p[i].x, p[i].y;
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[k] = 1.0;
  return m.fullPivLu().solve(e);
}

// Element stiffness by quadrature of grad phi_a . grad phi_b.
inline Eigen::Matrix3d element_stiffness(const std::array<Point, 3>& p) {
  Eigen::Matrix3d k;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const Eigen::Vector3d ha = hat(p, a), hb = hat(p, b);
      k(a, b) = integrate(p[0], p[1], p[2], [&](Point) { return ha[1] * hb[1] + ha[2] * hb[2]; }, 0);
    }
  return k;
}

// Dense global stiffness over free dofs by element loop with quadrature.
inline Eigen::MatrixXd global_stiffness(const sbddc::Mesh& mesh, const sbddc::DofPartition& dofs,
                                        const Eigen::VectorXd& kappa) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dofs.num_free(), dofs.num_free());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& nd = mesh.cell(c).nodes;
    const std::array<Point, 3> p{mesh.nodes()[nd[0]], mesh.nodes()[nd[1]], mesh.nodes()[nd[2]]};
    const Eigen::Matrix3d k = kappa[c] * element_stiffness(p);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int i = dofs.free_index(nd[a]), j = dofs.free_index(nd[b]);
        if (i >= 0 && j >= 0) A(i, j) += k(a, b);
      }
  }
  return A;
}

// Schur complement of M onto the index set keep (eliminating the rest).
inline Eigen::MatrixXd schur_onto(const Eigen::MatrixXd& M, const std::vector<int>& keep) {
  std::vector<char> is_keep(M.rows(), 0);
  for (int k : keep) is_keep[k] = 1;
  std::vector<int> elim;
  for (int i = 0; i < M.rows(); ++i)
    if (!is_keep[i]) elim.push_back(i);
  auto sub = [&](const std::vector<int>& r, const std::vector<int>& c) {
    Eigen::MatrixXd out(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = M(r[i], c[j]);
    return out;
  };
  const Eigen::MatrixXd kk = sub(keep, keep);
  if (elim.empty()) return kk;
  return kk - sub(keep, elim) * sub(elim, elim).fullPivLu().solve(sub(elim, keep));
}

// Interface Schur complement of the global matrix in Gamma ordering.
inline Eigen::MatrixXd global_schur(const Eigen::MatrixXd& A, const sbddc::DofPartition& dofs) {
  return schur_onto(A, dofs.gamma());
}

// Partially assembled matrix on [interiors of all subdomains | primal | dual copies].
struct Tilde {
  Eigen::MatrixXd A;
  int n_interior = 0;
};

inline Tilde tilde_matrix(const sbddc::DofPartition& dofs, const std::vector<sbddc::SubdomainBlocks>& blocks) {
  int ni = 0;
  std::vector<int> offset;
  for (int s = 0; s < dofs.num_subdomains(); ++s) {
    offset.push_back(ni);
    ni += dofs.subdomain(s).n_interior;
  }
  const int np = dofs.num_primal();
  const int n = ni + np + dofs.num_dual_copies();
  Tilde t;
  t.n_interior = ni;
  t.A = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < dofs.num_subdomains(); ++s) {
    const auto& sd = dofs.subdomain(s);
    std::vector<int> map;
    for (int k = 0; k < sd.n_interior; ++k) map.push_back(offset[s] + k);
    for (int k = 0; k < sd.n_dual; ++k) map.push_back(ni + np + sd.dual_slot[k]);
    for (int k = 0; k < sd.n_primal; ++k) map.push_back(ni + sd.primal_slot[k]);
    const auto& L = blocks[s].full;
    for (int a = 0; a < L.rows(); ++a)
      for (int b = 0; b < L.cols(); ++b) t.A(map[a], map[b]) += L(a, b);
  }
  return t;
}

// S~_Gamma on the [primal | copies] layout.
inline Eigen::MatrixXd tilde_schur(const Tilde& t) {
  std::vector<int> keep;
  for (int i = t.n_interior; i < t.A.rows(); ++i) keep.push_back(i);
  return schur_onto(t.A, keep);
}

// Dense R~_{D,Gamma} (tilde_size x num_gamma).
inline Eigen::MatrixXd weighted_restriction(const sbddc::DofPartition& dofs, const sbddc::ScalingWeights& w) {
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(dofs.tilde_size(), dofs.num_gamma());
  for (int p = 0; p < dofs.num_primal(); ++p) R(p, dofs.primal()[p]) = 1.0;
  for (int k = 0; k < dofs.num_dual_copies(); ++k) R(dofs.num_primal() + k, dofs.dual_copy_gamma()[k]) = w.dual[k];
  return R;
}

// Dense R~_Gamma.
inline Eigen::MatrixXd restriction(const sbddc::DofPartition& dofs) {
  sbddc::ScalingWeights ones{Eigen::VectorXd::Ones(dofs.num_dual_copies())};
  return weighted_restriction(dofs, ones);
}

// BDDC preconditioner R_D^T S~^{-1} R_D from the explicit partially assembled operator.
inline Eigen::MatrixXd bddc_dense(const sbddc::DofPartition& dofs, const std::vector<sbddc::SubdomainBlocks>& blocks,
                                  const sbddc::ScalingWeights& w) {
  const Eigen::MatrixXd St = tilde_schur(tilde_matrix(dofs, blocks));
  const Eigen::MatrixXd RD = weighted_restriction(dofs, w);
  return RD.transpose() * St.fullPivLu().inverse() * RD;
}

// Coarse matrix: Schur complement of the partially assembled matrix onto the primal dofs.
inline Eigen::MatrixXd coarse_dense(const sbddc::DofPartition& dofs, const std::vector<sbddc::SubdomainBlocks>& blocks) {
  const Tilde t = tilde_matrix(dofs, blocks);
  std::vector<int> keep;
  for (int p = 0; p < dofs.num_primal(); ++p) keep.push_back(t.n_interior + p);
  return schur_onto(t.A, keep);
}

// Matrix of a linear map by applying it to the unit vectors.
template <class F>
Eigen::MatrixXd to_dense(F&& f, int n) {
  Eigen::MatrixXd m(n, n);
  for (int j = 0; j < n; ++j) m.col(j) = f(Eigen::VectorXd::Unit(n, j));
  return m;
}

// E[g(xi)] for xi ~ N(0, 1) with an npts-point Gauss-Hermite rule.
inline double gauss_hermite_expect(const std::function<double(double)>& g, int npts) {
  // Golub-Welsch on the physicists' Jacobi matrix, then rescale to N(0, 1).
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npts, npts);
  for (int k = 1; k < npts; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  double s = 0.0;
  for (int k = 0; k < npts; ++k) {
    const double x = es.eigenvalues()[k];
    const double v = es.eigenvectors()(0, k);
    s += v * v * g(std::sqrt(2.0) * x);
  }
  return s;
}

// Orthonormal probabilists' Hermite polynomial by recurrence, in long double.
inline long double hermite_ld(int k, long double x) {
  long double prev = 0.0L, cur = 1.0L;
  for (int j = 0; j < k; ++j) {
    const long double next = (x * cur - std::sqrt(static_cast<long double>(j)) * prev) / std::sqrt(j + 1.0L);
    prev = cur;
    cur = next;
  }
  return cur;
}

// Gauss-Hermite rule for N(0, 1) in long double. Nodes are Newton-refined on
// the monic recurrence and mirrored, so odd integrands cancel exactly.
struct LdRule {
  std::vector<long double> x, w;
};

inline LdRule gauss_hermite_ld(int npts) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(npts, npts);
  for (int k = 1; k < npts; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  const Eigen::VectorXd guess = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(J).eigenvalues();
  auto monic = [npts](long double x, long double& pm1) {
    long double prev = 0.0L, cur = 1.0L;
    for (int j = 0; j < npts; ++j) {
      const long double next = x * cur - j * prev;
      prev = cur;
      cur = next;
    }
    pm1 = prev;
    return cur;
  };
  long double fact = 1.0L;
  for (int j = 2; j <= npts; ++j) fact *= j;
  LdRule r;
  for (int k = 0; k < npts; ++k) {
    if (guess[k] < -1e-8) continue;
    long double x = guess[k] < 1e-8 ? 0.0L : guess[k], pm1 = 0.0L;
    for (int it = 0; it < 10 && x != 0.0L; ++it) x -= monic(x, pm1) / (npts * pm1);
    monic(x, pm1);
    const long double w = fact / (static_cast<long double>(npts) * npts * pm1 * pm1);
    r.x.push_back(x);
    r.w.push_back(w);
    if (x != 0.0L) {
      r.x.push_back(-x);
      r.w.push_back(w);
    }
  }
  return r;
}

inline long double gauss_hermite_expect_ld(const std::function<long double(long double)>& g, int npts) {
  const LdRule r = gauss_hermite_ld(npts);
  long double pos = 0.0L, neg = 0.0L;
  for (std::size_t k = 0; k < r.x.size(); ++k) {
    const long double t = r.w[k] * g(r.x[k]);
    (t >= 0 ? pos : neg) += t;
  }
  return pos + neg;
}

}  // namespace oracle
