#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sbddc/assembly.hpp"
#include "sbddc/mesh.hpp"
#include "sbddc/random_field.hpp"

namespace sbddc {

/// Counts dense factorizations made by the calling thread and the largest
/// dimension seen.
struct FactorizationCounter {
  long count = 0;
  int max_size = 0;
};
FactorizationCounter& factorization_counter();
void reset_factorization_counter();
void note_factorization(int size);

/// Interface operator sum_i R_i^T S_i R_i with dense local matrices on the
/// subdomain Gamma dofs (dual then primal).
class SchurOperator {
 public:
  SchurOperator() = default;
  SchurOperator(const DofPartition& dofs, std::vector<Eigen::MatrixXd> local);

  int size() const { return n_; }
  const Eigen::MatrixXd& local(int s) const { return local_[s]; }
  Eigen::VectorXd apply(const Eigen::VectorXd& u_gamma) const;

 private:
  const DofPartition* dofs_ = nullptr;
  int n_ = 0;
  std::vector<Eigen::MatrixXd> local_;
};

/// Exact elimination data for the interior dofs of every subdomain.
class InteriorSolver {
 public:
  InteriorSolver(const DofPartition& dofs, const std::vector<SubdomainBlocks>& blocks);

  /// S_i = A_GG - A_GI A_II^{-1} A_GI^T for every subdomain.
  SchurOperator schur() const;
  /// g = f_Gamma - sum_i A_GI A_II^{-1} f_I.
  Eigen::VectorXd reduce_rhs(const Eigen::VectorXd& f) const;
  /// Full free-dof solution from the interface values.
  Eigen::VectorXd recover(const Eigen::VectorXd& f, const Eigen::VectorXd& u_gamma) const;

 private:
  const DofPartition* dofs_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> a_ii_;
  std::vector<Eigen::MatrixXd> a_gi_;
  std::vector<Eigen::MatrixXd> a_gg_;
};

/// Scatters the free-dof vector of subdomain s onto its local
/// [I | Delta | Pi] ordering.
Eigen::VectorXd gather_local(const SubdomainDofs& sd, const Eigen::VectorXd& free_values);

/// Weights of the dual copies in W~_Gamma; primal entries carry weight 1.
struct ScalingWeights {
  Eigen::VectorXd dual;  // one per dual copy
};

/// rho-scaling: the weight of copy i at node x is kbar_i(x) / sum_j kbar_j(x)
/// with kbar_i(x) the mean coefficient over the cells of subdomain i that
/// touch x.
ScalingWeights rho_scaling(const Mesh& mesh, const DofPartition& dofs, const Eigen::VectorXd& kappa);

/// R~_{D,Gamma} u = D R~_Gamma u.
Eigen::VectorXd weighted_restrict(const DofPartition& dofs, const ScalingWeights& w,
                                  const Eigen::VectorXd& u_gamma);
/// R~_{D,Gamma}^T w.
Eigen::VectorXd weighted_extend(const DofPartition& dofs, const ScalingWeights& w,
                                const Eigen::VectorXd& w_tilde);
/// E_D w = R~_Gamma R~_{D,Gamma}^T w.
Eigen::VectorXd average_operator_apply(const DofPartition& dofs, const ScalingWeights& w,
                                       const Eigen::VectorXd& w_tilde);

/// Per-subdomain pieces the preconditioner needs: the dual-dual block of
/// A_rr^{-1}, the dual rows of X = A_rr^{-1} A_cr^T and the local coarse
/// contribution S_Pi^(i).
struct LocalCoarseData {
  Eigen::MatrixXd inv_dd;
  Eigen::MatrixXd x_d;
  Eigen::MatrixXd s_pi;
};

/// Local data from exact blocks (one Cholesky factorization of A_rr).
LocalCoarseData exact_local_data(const SubdomainBlocks& blocks);

class BddcPreconditioner {
 public:
  BddcPreconditioner(const DofPartition& dofs, std::vector<LocalCoarseData> local,
                     ScalingWeights weights);

  static BddcPreconditioner from_blocks(const DofPartition& dofs,
                                        const std::vector<SubdomainBlocks>& blocks,
                                        ScalingWeights weights);

  int size() const { return dofs_->num_gamma(); }
  /// M^{-1} r = R~_{D,Gamma}^T S~^{-1} R~_{D,Gamma} r.
  Eigen::VectorXd apply(const Eigen::VectorXd& r_gamma) const;
  /// S~^{-1} on the partially assembled space.
  Eigen::VectorXd apply_tilde(const Eigen::VectorXd& w) const;

  const Eigen::MatrixXd& coarse_matrix() const { return s_pi_; }
  const ScalingWeights& weights() const { return weights_; }
  const LocalCoarseData& local(int s) const { return local_[s]; }

 private:
  const DofPartition* dofs_;
  std::vector<LocalCoarseData> local_;
  ScalingWeights weights_;
  Eigen::MatrixXd s_pi_;
  Eigen::LLT<Eigen::MatrixXd> s_pi_llt_;
};

/// Global primal matrix sum_i R_Pi^T S_Pi^(i) R_Pi.
Eigen::MatrixXd assemble_coarse(const DofPartition& dofs, const std::vector<LocalCoarseData>& local);

/// BDDC for the constant coefficient exp(sigma2 / 2).
BddcPreconditioner mean_preconditioner(const Mesh& mesh, const DofPartition& dofs,
                                       const CovarianceSpec& spec);

}  // namespace sbddc
