#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sbddc {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Cell {
  std::array<int, 3> nodes{};
  double area = 0.0;
  int subdomain = 0;
};

/// Structured triangulation of the unit square split into ns x ns square
/// subdomains of n x n squares each. Every square is cut along its
/// lower-left to upper-right diagonal. Nodes and squares are numbered
/// row-major (y outer, x inner); the lower-right triangle of a square
/// precedes the upper-left one.
class Mesh {
 public:
  Mesh(int ns, int n);

  int ns() const { return ns_; }
  int n() const { return n_; }
  int cells_per_side() const { return ns_ * n_; }
  double h() const { return 1.0 / cells_per_side(); }
  int num_subdomains() const { return ns_ * ns_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const Cell& cell(int c) const { return cells_[c]; }
  bool on_boundary(int node) const { return boundary_[node] != 0; }

  int node_index(int ix, int iy) const { return iy * (cells_per_side() + 1) + ix; }
  Point centroid(int c) const;

  /// Cells of subdomain s in local order (row-major squares inside the
  /// subdomain). The local order is identical for every subdomain.
  const std::vector<int>& subdomain_cells(int s) const { return subdomain_cells_[s]; }
  /// Closed-subdomain nodes in local row-major order.
  const std::vector<int>& subdomain_nodes(int s) const { return subdomain_nodes_[s]; }
  Point subdomain_origin(int s) const;

  /// Bit mask of the sides of subdomain s lying on the outer boundary:
  /// 1 left, 2 right, 4 bottom, 8 top.
  int boundary_signature(int s) const;

 private:
  int ns_;
  int n_;
  std::vector<Point> nodes_;
  std::vector<Cell> cells_;
  std::vector<char> boundary_;
  std::vector<std::vector<int>> subdomain_cells_;
  std::vector<std::vector<int>> subdomain_nodes_;
};

Mesh build_mesh(int ns, int n);

/// Index sets of one subdomain. Local free dofs are ordered
/// [interior | dual | primal]; r = interior + dual, c = primal.
struct SubdomainDofs {
  std::vector<int> local_free;    // global free-dof index per local dof
  std::vector<int> local_node;    // global node id per local dof
  int n_interior = 0;
  int n_dual = 0;
  int n_primal = 0;
  std::vector<int> dual_slot;     // position in W_Delta per local dual dof
  std::vector<int> primal_slot;   // position in the primal numbering
  std::vector<int> gamma_slot;    // position in the Gamma numbering, per local dual then primal dof

  int n_r() const { return n_interior + n_dual; }
  int n_c() const { return n_primal; }
  int n_gamma() const { return n_dual + n_primal; }
  int size() const { return n_r() + n_c(); }
};

enum class DofKind { Dirichlet, Interior, Dual, Primal };

/// Classification of free dofs into subdomain interiors I, dual Delta and
/// primal Pi (interior subdomain cross points) with the restriction maps
/// stored as index arrays.
///
/// The partially assembled interface space is laid out as
/// [primal (n_primal) | W_Delta copies (n_dual_copies)].
class DofPartition {
 public:
  explicit DofPartition(const Mesh& mesh);

  int num_free() const { return static_cast<int>(free_node_.size()); }
  int free_index(int node) const { return node_free_[node]; }
  int free_node(int dof) const { return free_node_[dof]; }
  DofKind kind(int dof) const { return kind_[dof]; }

  /// Gamma numbering: free dofs on the interface, ascending free index.
  int num_gamma() const { return static_cast<int>(gamma_.size()); }
  const std::vector<int>& gamma() const { return gamma_; }
  int gamma_index(int dof) const { return dof_gamma_[dof]; }

  int num_primal() const { return static_cast<int>(primal_.size()); }
  /// Gamma index of each primal dof.
  const std::vector<int>& primal() const { return primal_; }
  int num_dual() const { return static_cast<int>(dual_.size()); }
  const std::vector<int>& dual() const { return dual_; }
  /// Primal position of a Gamma index, -1 if dual.
  int primal_index(int gamma) const { return gamma_primal_[gamma]; }

  int num_dual_copies() const { return n_dual_copies_; }
  int tilde_size() const { return num_primal() + n_dual_copies_; }
  /// Gamma index of each W_Delta slot.
  const std::vector<int>& dual_copy_gamma() const { return dual_copy_gamma_; }
  /// Subdomain owning each W_Delta slot.
  const std::vector<int>& dual_copy_subdomain() const { return dual_copy_subdomain_; }

  int num_subdomains() const { return static_cast<int>(subdomains_.size()); }
  const SubdomainDofs& subdomain(int s) const { return subdomains_[s]; }
  const std::vector<int>& interior(int s) const { return interior_[s]; }

  /// R~_Gamma: copy Pi entries, duplicate Delta entries per subdomain.
  Eigen::VectorXd to_tilde(const Eigen::VectorXd& u_gamma) const;
  /// R~_Gamma^T: sum the copies back onto Gamma.
  Eigen::VectorXd from_tilde(const Eigen::VectorXd& w) const;

 private:
  std::vector<int> node_free_;
  std::vector<int> free_node_;
  std::vector<DofKind> kind_;
  std::vector<int> gamma_;
  std::vector<int> dof_gamma_;
  std::vector<int> primal_;
  std::vector<int> dual_;
  std::vector<int> gamma_primal_;
  int n_dual_copies_ = 0;
  std::vector<int> dual_copy_gamma_;
  std::vector<int> dual_copy_subdomain_;
  std::vector<SubdomainDofs> subdomains_;
  std::vector<std::vector<int>> interior_;
};

DofPartition classify_dofs(const Mesh& mesh);

using SourceFunction = std::function<double(Point)>;

/// f(x, y) = 2 pi^2 sin(pi x) sin(pi y).
double default_source(Point p);

/// F_s = int phi_s f over free dofs. Each triangle is integrated with a
/// collapsed Gauss-Legendre rule of degree 19.
Eigen::VectorXd load_vector(const Mesh& mesh, const DofPartition& dofs,
                            const SourceFunction& f = default_source);

/// L2 norm of the P1 function with free-dof values u (zero on the boundary).
double l2_norm(const Mesh& mesh, const DofPartition& dofs, const Eigen::VectorXd& u);

}  // namespace sbddc
