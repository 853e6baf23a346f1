#pragma once

#include <functional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sbddc/assembly.hpp"
#include "sbddc/chaos.hpp"
#include "sbddc/mesh.hpp"
#include "sbddc/random_field.hpp"

namespace sbddc {

/// Nonzero entries (T_alpha)_{lk} = <psi_alpha psi_beta(k) psi_beta(l)> for
/// beta in S_d and alpha in S_2d.
class GalerkinTensor {
 public:
  struct Entry {
    int l;
    int k;
    int alpha;
    double value;
  };
  GalerkinTensor(const MultiIndexSet& set_d, const MultiIndexSet& set_2d);
  int n_xi() const { return n_xi_; }
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  int n_xi_;
  std::vector<Entry> entries_;
};

/// Stochastic Galerkin block system A_s = sum_alpha T_alpha (x) A_alpha for
/// a matrix expansion over S_2d, projected onto S_d.
class SgBlockSystem {
 public:
  /// Systems of size up to dense_limit are factorized densely, larger ones
  /// (or force_cg) are solved by CG preconditioned with I (x) A_0.
  SgBlockSystem(const PCMatrix& a_2d, IndexSetPtr set_d, bool force_cg = false, int dense_limit = 8000);

  int n_xi() const { return tensor_.n_xi(); }
  int block() const { return n_; }
  int size() const { return n_xi() * n_; }
  bool dense() const { return dense_; }
  const IndexSetPtr& set() const { return set_d_; }
  const GalerkinTensor& tensor() const { return tensor_; }

  /// Explicit A_s (for small systems and tests).
  Eigen::MatrixXd matrix() const;
  /// A_s y for a stacked vector or block of columns.
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& y) const;
  /// Solves A_s Y = v with v stacked from the rhs expansion over S_d.
  PCMatrix solve(const PCMatrix& rhs) const;
  /// Z_beta(l) = sum_k sum_alpha T_alpha[l, k] B_alpha Y_beta(k).
  PCMatrix galerkin_product(const PCMatrix& b_2d, const PCMatrix& y) const;

 private:
  IndexSetPtr set_d_;
  PCMatrix a_;
  int n_;
  GalerkinTensor tensor_;
  bool dense_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::LLT<Eigen::MatrixXd> mean_llt_;
};

/// Coefficient-wise (P + P^T) / 2.
PCMatrix symmetrized(const PCMatrix& p);

/// PC expansion of A_rr^{-1} from n_r solves with right-hand side e_1 (x) I.
/// The coefficients are symmetrized.
PCMatrix sg_inverse(const SgBlockSystem& sys);
/// PC expansion of X = A_rr^{-1} A_cr^T with the right-hand side taken from
/// A_cr truncated to S_d.
PCMatrix sg_X(const SgBlockSystem& sys, const PCMatrix& a_cr_2d);

struct CoarsePc {
  PCMatrix z;     // A_cr A_rr^{-1} A_cr^T, symmetrized
  PCMatrix s_pi;  // A_cc - Z over S_d
};
CoarsePc sg_Z_and_SPi(const SgBlockSystem& sys, const PCMatrix& a_cr_2d, const PCMatrix& x,
                      const PCMatrix& a_cc_d);

struct SchurPc {
  PCMatrix a_gg;     // A_GammaGamma over S_d
  PCMatrix z;        // (A_GammaI A_II^{-1} A_GammaI^T) over S_d
  PCMatrix s_gamma;  // a_gg - z
  PCMatrix x_i;      // A_II^{-1} A_GammaI^T over S_d
};
/// Surrogate Schur pieces from the expansion of a subdomain matrix over S_2d
/// in [I | Gamma] order. sys_ii must be built on the interior block.
SchurPc sg_schur_pc(const SgBlockSystem& sys_ii, const PCMatrix& full_2d, int n_i);

/// Tensor Gauss-Hermite projection onto the PC basis: for each output,
/// coefficient alpha = sum_q M(xi_q) psi_alpha(xi_q) w_q.
std::vector<PCMatrix> sc_project(IndexSetPtr set_d, int q,
                                 const std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>& fn);

/// Symmetric square root of a positive semidefinite matrix. Eigenvalues
/// slightly below zero (relative 1e-10) are clamped, larger negative ones
/// raise NumericalError.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s);

struct ScComponents {
  PCMatrix r_rr;  // upper Cholesky factor of A_rr
  PCMatrix h_pi;  // symmetric square root of S_Pi^(i)
  PCMatrix r_ii;  // upper Cholesky factor of A_II (surrogate operator only)
};
/// Collocation expansions for subdomain s on q points per local dimension.
ScComponents sc_build(const Mesh& mesh, const DofPartition& dofs, int s, const KLBasis& basis,
                      IndexSetPtr set_d, int q, bool with_interior);

enum class Method { Exact, Mpc, Sg, Sc };
const char* method_name(Method m);
Method parse_method(const std::string& s);

struct OfflineOptions {
  Method method = Method::Sg;
  int nkl = 1;
  int degree = 4;
  int quad = 0;  // 0 means degree + 1
  bool surrogate = false;
  bool force_cg = false;
  int dense_limit = 8000;

  int quad_points() const { return quad > 0 ? quad : degree + 1; }
};

/// Offline data shared by all subdomains with the same boundary signature.
struct ClassComponents {
  int representative = -1;
  // preconditioner, SG
  PCMatrix inv_dd;
  PCMatrix x_d;
  PCMatrix s_pi;
  // preconditioner, SC (together with a_cr)
  PCMatrix r_rr;
  PCMatrix a_cr;
  PCMatrix h_pi;
  // surrogate operator
  PCMatrix s_gamma;  // SG
  PCMatrix x_i;      // SG
  PCMatrix r_ii;     // SC
  PCMatrix a_gi;     // SC
  PCMatrix a_gg;     // SC
};

/// SG expansions of A_II^{-1} f_I and A_GammaI A_II^{-1} f_I for one subdomain.
struct RhsPc {
  PCMatrix y_f;
  PCMatrix z_f;
};

struct OfflineStore {
  OfflineOptions options;
  CovarianceSpec spec;
  int ns = 0;
  int n = 0;
  KLBasis basis;  // local KL basis, shared by all subdomains
  IndexSetPtr set_d;
  std::vector<int> class_of;  // per subdomain
  std::vector<ClassComponents> classes;
  std::vector<RhsPc> rhs;  // per subdomain, SG surrogate only
  double build_seconds = 0.0;

  const ClassComponents& of(int s) const { return classes[class_of[s]]; }
};

/// Offline stage for method sg or sc. The load vector is only needed for the
/// SG surrogate operator.
OfflineStore build_offline(const Mesh& mesh, const DofPartition& dofs, const CovarianceSpec& spec,
                           const OfflineOptions& opts, const Eigen::VectorXd& load = {});

}  // namespace sbddc
