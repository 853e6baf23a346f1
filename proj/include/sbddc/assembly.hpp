#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sbddc/chaos.hpp"
#include "sbddc/mesh.hpp"
#include "sbddc/random_field.hpp"

namespace sbddc {

/// Element stiffness int grad phi_a . grad phi_b for kappa = 1.
Eigen::Matrix3d element_stiffness(const Mesh& mesh, int cell);

/// Stiffness matrix over all nodes of the scope, without boundary
/// elimination. With no subdomain the scope is the whole mesh (global node
/// numbering); otherwise it is subdomain s in the order of
/// Mesh::subdomain_nodes(s) with kappa given on the subdomain's local cells.
Eigen::SparseMatrix<double> assemble_stiffness(const Mesh& mesh, std::span<const double> kappa,
                                               std::optional<int> subdomain = std::nullopt);

/// Global stiffness over free dofs (Dirichlet rows/cols removed).
Eigen::SparseMatrix<double> assemble_global(const Mesh& mesh, const DofPartition& dofs,
                                            std::span<const double> kappa);

/// Neumann matrix of subdomain s over its local free dofs in the order
/// [interior | dual | primal]; kappa is given per local cell.
Eigen::MatrixXd assemble_subdomain(const Mesh& mesh, const DofPartition& dofs, int s,
                                   std::span<const double> kappa_local);

/// Block view of a subdomain matrix in [I | Delta | Pi] order.
struct SubdomainBlocks {
  Eigen::MatrixXd full;
  int n_i = 0;
  int n_d = 0;
  int n_p = 0;

  int n_r() const { return n_i + n_d; }
  int n_c() const { return n_p; }
  int n_gamma() const { return n_d + n_p; }

  Eigen::MatrixXd A_II() const { return full.topLeftCorner(n_i, n_i); }
  Eigen::MatrixXd A_DI() const { return full.block(n_i, 0, n_d, n_i); }
  Eigen::MatrixXd A_DD() const { return full.block(n_i, n_i, n_d, n_d); }
  Eigen::MatrixXd A_PI() const { return full.block(n_r(), 0, n_p, n_i); }
  Eigen::MatrixXd A_PD() const { return full.block(n_r(), n_i, n_p, n_d); }
  Eigen::MatrixXd A_PP() const { return full.bottomRightCorner(n_p, n_p); }

  Eigen::MatrixXd A_rr() const { return full.topLeftCorner(n_r(), n_r()); }
  Eigen::MatrixXd A_cr() const { return full.bottomLeftCorner(n_c(), n_r()); }
  Eigen::MatrixXd A_cc() const { return full.bottomRightCorner(n_c(), n_c()); }
  /// Gamma = [Delta | Pi].
  Eigen::MatrixXd A_GI() const { return full.bottomLeftCorner(n_gamma(), n_i); }
  Eigen::MatrixXd A_GG() const { return full.bottomRightCorner(n_gamma(), n_gamma()); }
};

SubdomainBlocks split_blocks(const Eigen::MatrixXd& a_subdomain, const DofPartition& dofs, int s);

/// Blocks of every subdomain for a global per-cell coefficient.
std::vector<SubdomainBlocks> assemble_all_blocks(const Mesh& mesh, const DofPartition& dofs,
                                                 const Eigen::VectorXd& kappa);

/// PC coefficients of the per-cell lognormal coefficient exp(sum_m
/// sqrt(lambda_m) a_m(cell) xi_m), one row per local cell, one column per
/// multi-index in the set.
Eigen::MatrixXd lognormal_cell_coefficients(const KLBasis& basis, const MultiIndexSet& set);

/// PC expansion of the subdomain Neumann matrix over the set: the
/// coefficient for alpha is the stiffness assembled with the alpha-th
/// per-cell coefficient.
PCMatrix assemble_pc_matrices(const Mesh& mesh, const DofPartition& dofs, int s,
                              const KLBasis& basis, IndexSetPtr set);

/// Extracts a sub-block from every coefficient of a PC expansion.
PCMatrix pc_block(const PCMatrix& p, int row, int col, int rows, int cols);

}  // namespace sbddc
