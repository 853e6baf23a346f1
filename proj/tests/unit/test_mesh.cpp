#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "sbddc/errors.hpp"
#include "sbddc/mesh.hpp"

using namespace sbddc;

TEST_CASE("mesh counts") {
  const Mesh m11(1, 1);
  CHECK(m11.num_nodes() == 4);
  CHECK(m11.num_cells() == 2);
  CHECK(DofPartition(m11).num_free() == 0);

  const Mesh m22(2, 2);
  CHECK(m22.num_nodes() == 25);
  CHECK(m22.num_cells() == 32);

  const Mesh m88 = build_mesh(8, 8);
  CHECK(m88.num_nodes() == 4225);
  CHECK(m88.num_cells() == 8192);
}

TEST_CASE("mesh rejects nonpositive sizes") {
  CHECK_THROWS_AS(Mesh(0, 2), ConfigError);
  CHECK_THROWS_AS(Mesh(2, 0), ConfigError);
}

TEST_CASE("cell areas and subdomain membership") {
  for (auto [ns, n] : {std::pair{1, 3}, {2, 2}, {3, 4}, {4, 4}}) {
    const Mesh m(ns, n);
    const double h = m.h();
    double total = 0.0;
    std::vector<int> owner(m.num_cells(), 0);
    for (int c = 0; c < m.num_cells(); ++c) {
      const auto& cell = m.cell(c);
      const auto& p = m.nodes();
      CHECK(cell.area == doctest::Approx(h * h / 2).epsilon(1e-13));
      CHECK(oracle::area(p[cell.nodes[0]], p[cell.nodes[1]], p[cell.nodes[2]]) ==
            doctest::Approx(cell.area).epsilon(1e-12));
      total += cell.area;
      // the centroid lies in the square of its subdomain
      const Point o = m.subdomain_origin(cell.subdomain);
      const Point g = m.centroid(c);
      CHECK(g.x > o.x);
      CHECK(g.x < o.x + 1.0 / ns);
      CHECK(g.y > o.y);
      CHECK(g.y < o.y + 1.0 / ns);
    }
    CHECK(std::abs(total - 1.0) < 1e-14);
    for (int s = 0; s < m.num_subdomains(); ++s)
      for (int c : m.subdomain_cells(s)) ++owner[c];
    CHECK(std::all_of(owner.begin(), owner.end(), [](int k) { return k == 1; }));
  }
}

TEST_CASE("triangle split and ordering") {
  const Mesh m(1, 1);
  // nodes row-major: (0,0), (1,0), (0,1), (1,1)
  CHECK(m.nodes()[1].x == 1.0);
  CHECK(m.nodes()[2].y == 1.0);
  // lower-right triangle first, both share the diagonal 0-3
  std::set<int> first(m.cell(0).nodes.begin(), m.cell(0).nodes.end());
  std::set<int> second(m.cell(1).nodes.begin(), m.cell(1).nodes.end());
  CHECK(first == std::set<int>{0, 1, 3});
  CHECK(second == std::set<int>{0, 2, 3});
}

TEST_CASE("dof classification counts") {
  const Mesh m22(2, 2);
  const DofPartition d22 = classify_dofs(m22);
  CHECK(d22.num_free() == 9);
  CHECK(d22.num_gamma() == 5);
  CHECK(d22.num_primal() == 1);
  CHECK(d22.num_dual() == 4);
  for (int s = 0; s < 4; ++s) {
    CHECK(d22.subdomain(s).n_interior == 1);
    CHECK(d22.subdomain(s).n_dual == 2);
    CHECK(d22.subdomain(s).n_primal == 1);
  }

  const Mesh m1(1, 5);
  const DofPartition d1(m1);
  CHECK(d1.num_gamma() == 0);
  CHECK(d1.num_primal() == 0);
  CHECK(d1.num_free() == 16);

  const Mesh m44(4, 4);
  CHECK(DofPartition(m44).num_primal() == 9);
}

TEST_CASE("index sets partition the free dofs") {
  for (auto [ns, n] : {std::pair{2, 2}, {3, 3}, {4, 2}, {3, 5}}) {
    const Mesh m(ns, n);
    const DofPartition d(m);
    std::vector<int> seen(d.num_free(), 0);
    for (int s = 0; s < d.num_subdomains(); ++s)
      for (int k : d.interior(s)) ++seen[k];
    for (int g : d.gamma()) seen[g] += 10;
    for (int k = 0; k < d.num_free(); ++k) {
      const bool interior = d.kind(k) == DofKind::Interior;
      CHECK(seen[k] == (interior ? 1 : 10));
    }
    // Gamma = Delta u Pi, disjoint
    std::set<int> pi(d.primal().begin(), d.primal().end());
    std::set<int> delta(d.dual().begin(), d.dual().end());
    CHECK(pi.size() + delta.size() == static_cast<std::size_t>(d.num_gamma()));
    for (int p : pi) CHECK(delta.count(p) == 0);
    // Dirichlet nodes excluded, all boundary nodes are Dirichlet
    for (int v = 0; v < m.num_nodes(); ++v) CHECK((d.free_index(v) < 0) == m.on_boundary(v));
  }
}

TEST_CASE("multiplicity of interface dofs") {
  const Mesh m(4, 3);
  const DofPartition d(m);
  std::vector<int> copies(d.num_gamma(), 0);
  for (int g : d.dual_copy_gamma()) ++copies[g];
  for (int g : d.dual()) CHECK(copies[g] == 2);
  std::vector<int> owners(d.num_primal(), 0);
  for (int s = 0; s < d.num_subdomains(); ++s)
    for (int p : d.subdomain(s).primal_slot) ++owners[p];
  for (int k : owners) CHECK(k == 4);
  // primal dofs are interior cross points
  for (int g : d.primal()) {
    const Point p = m.nodes()[d.free_node(d.gamma()[g])];
    const double X = p.x * m.ns(), Y = p.y * m.ns();
    CHECK(std::abs(X - std::round(X)) < 1e-12);
    CHECK(std::abs(Y - std::round(Y)) < 1e-12);
  }
}

TEST_CASE("tilde restriction: copies and sums") {
  const Mesh m(3, 3);
  const DofPartition d(m);
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(d.num_gamma(), 1.0, 2.0);
  const Eigen::VectorXd w = d.to_tilde(u);
  CHECK(w.size() == d.tilde_size());
  for (int k = 0; k < d.num_dual_copies(); ++k) CHECK(w[d.num_primal() + k] == u[d.dual_copy_gamma()[k]]);
  // R^T R multiplies duals by 2, primals by 1
  const Eigen::VectorXd back = d.from_tilde(w);
  for (int g : d.dual()) CHECK(back[g] == doctest::Approx(2 * u[g]));
  for (int g : d.primal()) CHECK(back[g] == doctest::Approx(u[g]));
}

TEST_CASE("local dof layout is shared within a boundary class") {
  const Mesh m(4, 3);
  const DofPartition d(m);
  // subdomains 5 and 6 are both interior: same local node offsets
  for (auto [a, b] : {std::pair{5, 6}, {5, 10}, {1, 2}}) {
    REQUIRE(m.boundary_signature(a) == m.boundary_signature(b));
    const auto& sa = d.subdomain(a);
    const auto& sb = d.subdomain(b);
    REQUIRE(sa.size() == sb.size());
    const Point oa = m.subdomain_origin(a), ob = m.subdomain_origin(b);
    for (int k = 0; k < sa.size(); ++k) {
      const Point pa = m.nodes()[sa.local_node[k]], pb = m.nodes()[sb.local_node[k]];
      CHECK(pa.x - oa.x == doctest::Approx(pb.x - ob.x));
      CHECK(pa.y - oa.y == doctest::Approx(pb.y - ob.y));
    }
  }
}

TEST_CASE("load vector") {
  const Mesh m(2, 2);
  const DofPartition d(m);
  const Eigen::VectorXd F = load_vector(m, d);
  CHECK(F.size() == d.num_free());
  CHECK(load_vector(m, d, [](Point) { return 0.0; }).norm() == 0.0);

  // centre node against the refined 7-point oracle
  const int centre = m.node_index(2, 2);
  const Point pc = m.nodes()[centre];
  double ref = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto& nd = m.cell(c).nodes;
    const auto it = std::find(nd.begin(), nd.end(), centre);
    if (it == nd.end()) continue;
    const std::array<Point, 3> p{m.nodes()[nd[0]], m.nodes()[nd[1]], m.nodes()[nd[2]]};
    const Eigen::Vector3d h = oracle::hat(p, static_cast<int>(it - nd.begin()));
    ref += oracle::integrate(p[0], p[1], p[2],
                             [&](Point x) { return (h[0] + h[1] * x.x + h[2] * x.y) * default_source(x); }, 6);
  }
  (void)pc;
  CHECK(std::abs(F[d.free_index(centre)] - ref) <= 1e-12 * std::abs(ref));

  // every entry on a finer mesh
  const Mesh m2(2, 3);
  const DofPartition d2(m2);
  const Eigen::VectorXd F2 = load_vector(m2, d2);
  Eigen::VectorXd R2 = Eigen::VectorXd::Zero(d2.num_free());
  for (int c = 0; c < m2.num_cells(); ++c) {
    const auto& nd = m2.cell(c).nodes;
    const std::array<Point, 3> p{m2.nodes()[nd[0]], m2.nodes()[nd[1]], m2.nodes()[nd[2]]};
    for (int a = 0; a < 3; ++a) {
      const int i = d2.free_index(nd[a]);
      if (i < 0) continue;
      const Eigen::Vector3d h = oracle::hat(p, a);
      R2[i] += oracle::integrate(p[0], p[1], p[2],
                                 [&](Point x) { return (h[0] + h[1] * x.x + h[2] * x.y) * default_source(x); }, 5);
    }
  }
  CHECK((F2 - R2).norm() <= 1e-12 * R2.norm());
}

TEST_CASE("l2 norm of P1 functions") {
  const Mesh m(2, 4);
  const DofPartition d(m);
  CHECK(l2_norm(m, d, Eigen::VectorXd::Zero(d.num_free())) == 0.0);
  // interpolant of sin(pi x) sin(pi y): its L2 norm approaches 1/2
  Eigen::VectorXd u(d.num_free());
  for (int k = 0; k < d.num_free(); ++k) {
    const Point p = m.nodes()[d.free_node(k)];
    u[k] = std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y);
  }
  // exact L2 norm of the interpolant by quadrature
  double ref = 0.0;
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto& nd = m.cell(c).nodes;
    const std::array<Point, 3> p{m.nodes()[nd[0]], m.nodes()[nd[1]], m.nodes()[nd[2]]};
    ref += oracle::integrate(p[0], p[1], p[2], [&](Point x) {
      double v = 0.0;
      for (int a = 0; a < 3; ++a) {
        const int i = d.free_index(nd[a]);
        if (i < 0) continue;
        const Eigen::Vector3d h = oracle::hat(p, a);
        v += u[i] * (h[0] + h[1] * x.x + h[2] * x.y);
      }
      return v * v;
    }, 0);
  }
  CHECK(l2_norm(m, d, u) == doctest::Approx(std::sqrt(ref)).epsilon(1e-12));
  CHECK(l2_norm(m, d, u) == doctest::Approx(0.5).epsilon(0.05));
}
