#include "sbddc/assembly.hpp"

#include <cmath>

#include "sbddc/errors.hpp"

namespace sbddc {

Eigen::Matrix3d element_stiffness(const Mesh& mesh, int cell) {
  const auto& c = mesh.cell(cell);
  const auto& nd = mesh.nodes();
  Eigen::Matrix<double, 2, 3> grad;
  const double twice_area = 2.0 * c.area;
  for (int a = 0; a < 3; ++a) {
    const Point pj = nd[c.nodes[(a + 1) % 3]];
    const Point pk = nd[c.nodes[(a + 2) % 3]];
    grad(0, a) = (pj.y - pk.y) / twice_area;
    grad(1, a) = (pk.x - pj.x) / twice_area;
  }
  return c.area * grad.transpose() * grad;
}

namespace {

void check_positive(std::span<const double> kappa) {
  for (double k : kappa)
    if (!(k > 0.0)) throw ConfigError("assemble_stiffness: coefficient must be positive");
}

}  // namespace

Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh, std::span<const double> kappa,
                                               std::optional<int> subdomain) {
  check_positive(kappa);
  std::vector<Eigen::Triplet<double>> trips;
  if (!subdomain) {
    if (static_cast<int>(kappa.size()) != mesh.num_cells())
      throw ConfigError("assemble_stiffness: kappa size mismatch");
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const Eigen::Matrix3d ke = kappa[c] * element_stiffness(mesh, c);
      const auto& nd = mesh.cell(c).nodes;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) trips.emplace_back(nd[a], nd[b], ke(a, b));
    }
    Eigen::SparseMatrix<double> A(mesh.num_nodes(), mesh.num_nodes());
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
  }

  const int s = *subdomain;
  const auto& cells = mesh.subdomain_cells(s);
  const auto& nodes = mesh.subdomain_nodes(s);
  if (kappa.size() != cells.size()) throw ConfigError("assemble_stiffness: kappa size mismatch");
  const int row = mesh.cells_per_side() + 1;
  const int side = mesh.n() + 1;
  const int x0 = nodes.front() % row;
  const int y0 = nodes.front() / row;
  auto local = [&](int v) { return (v / row - y0) * side + (v % row - x0); };
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Eigen::Matrix3d ke = kappa[k] * element_stiffness(mesh, cells[k]);
    const auto& nd = mesh.cell(cells[k]).nodes;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trips.emplace_back(local(nd[a]), local(nd[b]), ke(a, b));
  }
  const int nloc = static_cast<int>(nodes.size());
  Eigen::SparseMatrix<double> A(nloc, nloc);
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

Eigen::SparseMatrix<double> assemble_global(const Mesh& mesh, const DofPartition& dofs,
                                            std::span<const double> kappa) {
  check_positive(kappa);
  std::vector<Eigen::Triplet<double>> trips;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Eigen::Matrix3d ke = kappa[c] * element_stiffness(mesh, c);
    const auto& nd = mesh.cell(c).nodes;
    for (int a = 0; a < 3; ++a) {
      const int ra = dofs.free_index(nd[a]);
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int rb = dofs.free_index(nd[b]);
        if (rb >= 0) trips.emplace_back(ra, rb, ke(a, b));
      }
    }
  }
  Eigen::SparseMatrix<double> A(dofs.num_free(), dofs.num_free());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

Eigen::MatrixXd assemble_subdomain(const Mesh& mesh, const DofPartition& dofs, int s,
                                   std::span<const double> kappa_local) {
  check_positive(kappa_local);
  const auto& cells = mesh.subdomain_cells(s);
  if (kappa_local.size() != cells.size()) throw ConfigError("assemble_subdomain: kappa size mismatch");
  const auto& sd = dofs.subdomain(s);
  thread_local std::vector<int> map;
  map.assign(mesh.num_nodes(), -1);
  for (int k = 0; k < sd.size(); ++k) map[sd.local_node[k]] = k;

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(sd.size(), sd.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Eigen::Matrix3d ke = kappa_local[k] * element_stiffness(mesh, cells[k]);
    const auto& nd = mesh.cell(cells[k]).nodes;
    for (int a = 0; a < 3; ++a) {
      const int ra = map[nd[a]];
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int rb = map[nd[b]];
        if (rb >= 0) A(ra, rb) += ke(a, b);
      }
    }
  }
  return A;
}

SubdomainBlocks split_blocks(const Eigen::MatrixXd& a_subdomain, const DofPartition& dofs, int s) {
  const auto& sd = dofs.subdomain(s);
  if (a_subdomain.rows() != sd.size() || a_subdomain.cols() != sd.size())
    throw ConfigError("split_blocks: matrix does not match the subdomain dofs");
  return SubdomainBlocks{a_subdomain, sd.n_interior, sd.n_dual, sd.n_primal};
}

std::vector<SubdomainBlocks> assemble_all_blocks(const Mesh& mesh, const DofPartition& dofs,
                                                 const Eigen::VectorXd& kappa) {
  std::vector<SubdomainBlocks> blocks;
  blocks.reserve(dofs.num_subdomains());
  for (int s = 0; s < dofs.num_subdomains(); ++s) {
    const Eigen::VectorXd k_loc = restrict_to_subdomain(mesh, s, kappa);
    blocks.push_back(split_blocks(assemble_subdomain(mesh, dofs, s, {k_loc.data(), static_cast<std::size_t>(k_loc.size())}), dofs, s));
  }
  return blocks;
}

Eigen::MatrixXd lognormal_cell_coefficients(const KLBasis& basis, const MultiIndexSet& set) {
  if (set.dim() != basis.count()) throw ConfigError("lognormal_cell_coefficients: dimension mismatch");
  const int ncell = basis.num_cells();
  const int dim = set.dim();
  const int deg = set.degree();
  Eigen::MatrixXd out(ncell, set.size());
  Eigen::MatrixXd factors(dim, deg + 1);
  for (int c = 0; c < ncell; ++c) {
    double half_var = 0.0;
    for (int m = 0; m < dim; ++m) {
      const double cm = std::sqrt(std::max(basis.lambdas[m], 0.0)) * basis.modes(c, m);
      half_var += 0.5 * cm * cm;
      // cm^k / sqrt(k!)
      factors(m, 0) = 1.0;
      for (int k = 1; k <= deg; ++k) factors(m, k) = factors(m, k - 1) * cm / std::sqrt(static_cast<double>(k));
    }
    const double mean = std::exp(half_var);
    for (int a = 0; a < set.size(); ++a) {
      double v = mean;
      const auto& alpha = set[a];
      for (int m = 0; m < dim; ++m) v *= factors(m, alpha[m]);
      out(c, a) = v;
    }
  }
  return out;
}

PCMatrix assemble_pc_matrices(const Mesh& mesh, const DofPartition& dofs, int s,
                              const KLBasis& basis, IndexSetPtr set) {
  const Eigen::MatrixXd kc = lognormal_cell_coefficients(basis, *set);
  const auto& cells = mesh.subdomain_cells(s);
  if (kc.rows() != static_cast<int>(cells.size()))
    throw ConfigError("assemble_pc_matrices: basis is not defined on the subdomain cells");
  const auto& sd = dofs.subdomain(s);
  std::vector<int> map(mesh.num_nodes(), -1);
  for (int k = 0; k < sd.size(); ++k) map[sd.local_node[k]] = k;

  PCMatrix out(set, sd.size(), sd.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const Eigen::Matrix3d ke = element_stiffness(mesh, cells[k]);
    const auto& nd = mesh.cell(cells[k]).nodes;
    for (int a = 0; a < 3; ++a) {
      const int ra = map[nd[a]];
      if (ra < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int rb = map[nd[b]];
        if (rb < 0) continue;
        for (int t = 0; t < set->size(); ++t) out.coeffs[t](ra, rb) += kc(k, t) * ke(a, b);
      }
    }
  }
  return out;
}

PCMatrix pc_block(const PCMatrix& p, int row, int col, int rows, int cols) {
  PCMatrix out;
  out.set = p.set;
  out.coeffs.reserve(p.coeffs.size());
  for (const auto& c : p.coeffs) out.coeffs.push_back(c.block(row, col, rows, cols));
  return out;
}

}  // namespace sbddc
