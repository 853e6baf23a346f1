#include "sbddc/mesh.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "sbddc/errors.hpp"

namespace sbddc {

Mesh::Mesh(int ns, int n) : ns_(ns), n_(n) {
  if (ns < 1 || n < 1) throw ConfigError("build_mesh: ns and n must be positive");
  const int side = ns * n;
  const double h = 1.0 / side;

  nodes_.reserve(static_cast<std::size_t>(side + 1) * (side + 1));
  boundary_.reserve(nodes_.capacity());
  for (int iy = 0; iy <= side; ++iy) {
    for (int ix = 0; ix <= side; ++ix) {
      nodes_.push_back({ix * h, iy * h});
      boundary_.push_back(ix == 0 || iy == 0 || ix == side || iy == side);
    }
  }

  const double area = 0.5 * h * h;
  cells_.reserve(2 * static_cast<std::size_t>(side) * side);
  subdomain_cells_.assign(num_subdomains(), {});
  for (int jy = 0; jy < side; ++jy) {
    for (int jx = 0; jx < side; ++jx) {
      const int sub = (jy / n) * ns + jx / n;
      const int ll = node_index(jx, jy);
      const int lr = node_index(jx + 1, jy);
      const int ur = node_index(jx + 1, jy + 1);
      const int ul = node_index(jx, jy + 1);
      subdomain_cells_[sub].push_back(num_cells());
      cells_.push_back({{ll, lr, ur}, area, sub});
      subdomain_cells_[sub].push_back(num_cells());
      cells_.push_back({{ll, ur, ul}, area, sub});
    }
  }

  subdomain_nodes_.assign(num_subdomains(), {});
  for (int sy = 0; sy < ns; ++sy) {
    for (int sx = 0; sx < ns; ++sx) {
      auto& list = subdomain_nodes_[sy * ns + sx];
      for (int iy = sy * n; iy <= (sy + 1) * n; ++iy)
        for (int ix = sx * n; ix <= (sx + 1) * n; ++ix) list.push_back(node_index(ix, iy));
    }
  }
}

Point Mesh::centroid(int c) const {
  const auto& nd = cells_[c].nodes;
  return {(nodes_[nd[0]].x + nodes_[nd[1]].x + nodes_[nd[2]].x) / 3.0,
          (nodes_[nd[0]].y + nodes_[nd[1]].y + nodes_[nd[2]].y) / 3.0};
}

Point Mesh::subdomain_origin(int s) const {
  const double H = 1.0 / ns_;
  return {(s % ns_) * H, (s / ns_) * H};
}

int Mesh::boundary_signature(int s) const {
  const int sx = s % ns_;
  const int sy = s / ns_;
  int sig = 0;
  if (sx == 0) sig |= 1;
  if (sx == ns_ - 1) sig |= 2;
  if (sy == 0) sig |= 4;
  if (sy == ns_ - 1) sig |= 8;
  return sig;
}

Mesh build_mesh(int ns, int n) { return Mesh(ns, n); }

DofPartition::DofPartition(const Mesh& mesh) {
  const int side = mesh.cells_per_side();
  const int n = mesh.n();
  const int nnodes = mesh.num_nodes();

  node_free_.assign(nnodes, -1);
  for (int v = 0; v < nnodes; ++v) {
    if (mesh.on_boundary(v)) continue;
    node_free_[v] = static_cast<int>(free_node_.size());
    free_node_.push_back(v);
  }

  kind_.assign(free_node_.size(), DofKind::Interior);
  dof_gamma_.assign(free_node_.size(), -1);
  for (int dof = 0; dof < num_free(); ++dof) {
    const int v = free_node_[dof];
    const int ix = v % (side + 1);
    const int iy = v / (side + 1);
    const bool on_x = ix % n == 0;
    const bool on_y = iy % n == 0;
    if (on_x && on_y) {
      kind_[dof] = DofKind::Primal;
    } else if (on_x || on_y) {
      kind_[dof] = DofKind::Dual;
    } else {
      continue;
    }
    dof_gamma_[dof] = static_cast<int>(gamma_.size());
    gamma_.push_back(dof);
  }

  gamma_primal_.assign(gamma_.size(), -1);
  for (int g = 0; g < num_gamma(); ++g) {
    if (kind_[gamma_[g]] == DofKind::Primal) {
      gamma_primal_[g] = static_cast<int>(primal_.size());
      primal_.push_back(g);
    } else {
      dual_.push_back(g);
    }
  }

  const int nsub = mesh.num_subdomains();
  subdomains_.resize(nsub);
  interior_.resize(nsub);
  for (int s = 0; s < nsub; ++s) {
    std::vector<int> in, du, pr;
    for (int v : mesh.subdomain_nodes(s)) {
      const int dof = node_free_[v];
      if (dof < 0) continue;
      switch (kind_[dof]) {
        case DofKind::Interior: in.push_back(dof); break;
        case DofKind::Dual: du.push_back(dof); break;
        case DofKind::Primal: pr.push_back(dof); break;
        case DofKind::Dirichlet: break;
      }
    }
    auto& sd = subdomains_[s];
    sd.n_interior = static_cast<int>(in.size());
    sd.n_dual = static_cast<int>(du.size());
    sd.n_primal = static_cast<int>(pr.size());
    interior_[s] = in;
    for (const auto* part : {&in, &du, &pr}) {
      for (int dof : *part) {
        sd.local_free.push_back(dof);
        sd.local_node.push_back(free_node_[dof]);
      }
    }
    for (int dof : du) {
      sd.dual_slot.push_back(n_dual_copies_++);
      dual_copy_gamma_.push_back(dof_gamma_[dof]);
      dual_copy_subdomain_.push_back(s);
      sd.gamma_slot.push_back(dof_gamma_[dof]);
    }
    for (int dof : pr) {
      sd.primal_slot.push_back(gamma_primal_[dof_gamma_[dof]]);
      sd.gamma_slot.push_back(dof_gamma_[dof]);
    }
  }
}

Eigen::VectorXd DofPartition::to_tilde(const Eigen::VectorXd& u_gamma) const {
  Eigen::VectorXd w(tilde_size());
  for (int p = 0; p < num_primal(); ++p) w[p] = u_gamma[primal_[p]];
  for (int k = 0; k < n_dual_copies_; ++k) w[num_primal() + k] = u_gamma[dual_copy_gamma_[k]];
  return w;
}

Eigen::VectorXd DofPartition::from_tilde(const Eigen::VectorXd& w) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(num_gamma());
  for (int p = 0; p < num_primal(); ++p) u[primal_[p]] += w[p];
  for (int k = 0; k < n_dual_copies_; ++k) u[dual_copy_gamma_[k]] += w[num_primal() + k];
  return u;
}

DofPartition classify_dofs(const Mesh& mesh) { return DofPartition(mesh); }

double default_source(Point p) {
  constexpr double pi = std::numbers::pi;
  return 2.0 * pi * pi * std::sin(pi * p.x) * std::sin(pi * p.y);
}

namespace {

struct Rule1D {
  Eigen::VectorXd nodes;    // on [0, 1]
  Eigen::VectorXd weights;  // sum to 1
};

// Gauss-Legendre via the Golub-Welsch eigenproblem, mapped to [0, 1].
Rule1D gauss_legendre(int q) {
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(q, q);
  for (int k = 1; k < q; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Rule1D r{Eigen::VectorXd(q), Eigen::VectorXd(q)};
  for (int i = 0; i < q; ++i) {
    r.nodes[i] = 0.5 * (es.eigenvalues()[i] + 1.0);
    const double v = es.eigenvectors()(0, i);
    r.weights[i] = v * v;
  }
  return r;
}

}  // namespace

Eigen::VectorXd load_vector(const Mesh& mesh, const DofPartition& dofs, const SourceFunction& f) {
  static const Rule1D rule = gauss_legendre(10);
  Eigen::VectorXd F = Eigen::VectorXd::Zero(dofs.num_free());
  const auto& nodes = mesh.nodes();
  for (const auto& cell : mesh.cells()) {
    const Point p0 = nodes[cell.nodes[0]];
    const Point p1 = nodes[cell.nodes[1]];
    const Point p2 = nodes[cell.nodes[2]];
    std::array<double, 3> acc{0.0, 0.0, 0.0};
    // Collapsed map (u, v) -> (u, v (1 - u)) from the unit square.
    for (int i = 0; i < rule.nodes.size(); ++i) {
      const double u = rule.nodes[i];
      for (int j = 0; j < rule.nodes.size(); ++j) {
        const double s = u;
        const double t = rule.nodes[j] * (1.0 - u);
        const double w = rule.weights[i] * rule.weights[j] * (1.0 - u) * 2.0 * cell.area;
        const Point x{p0.x + s * (p1.x - p0.x) + t * (p2.x - p0.x),
                      p0.y + s * (p1.y - p0.y) + t * (p2.y - p0.y)};
        const double fw = f(x) * w;
        acc[0] += (1.0 - s - t) * fw;
        acc[1] += s * fw;
        acc[2] += t * fw;
      }
    }
    for (int a = 0; a < 3; ++a) {
      const int dof = dofs.free_index(cell.nodes[a]);
      if (dof >= 0) F[dof] += acc[a];
    }
  }
  return F;
}

double l2_norm(const Mesh& mesh, const DofPartition& dofs, const Eigen::VectorXd& u) {
  double sum = 0.0;
  for (const auto& cell : mesh.cells()) {
    std::array<double, 3> ue{};
    for (int a = 0; a < 3; ++a) {
      const int dof = dofs.free_index(cell.nodes[a]);
      ue[a] = dof >= 0 ? u[dof] : 0.0;
    }
    const double s = ue[0] + ue[1] + ue[2];
    const double sq = ue[0] * ue[0] + ue[1] * ue[1] + ue[2] * ue[2];
    // Element mass matrix area/12 * (1 + I).
    sum += cell.area / 12.0 * (sq + s * s);
  }
  return std::sqrt(sum);
}

}  // namespace sbddc
