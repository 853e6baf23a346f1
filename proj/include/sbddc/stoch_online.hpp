#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sbddc/bddc.hpp"
#include "sbddc/stoch_offline.hpp"

namespace sbddc {

/// Sample-specific stochastic BDDC preconditioner.
struct OnlineInstance {
  std::uint64_t seed = 0;
  std::vector<Eigen::VectorXd> xihat;  // local coordinates per subdomain
  std::vector<Eigen::VectorXd> psi;    // basis values at xihat per subdomain
  bool spd_ok = false;
  std::vector<int> failed_subdomains;
  double min_eigenvalue = 0.0;
  std::optional<BddcPreconditioner> preconditioner;  // present iff spd_ok
};

/// Evaluates the offline expansions at the local coordinates of the sampled
/// global field and builds the preconditioner. The scaling weights use the
/// sampled coefficient exp(field). An indefinite coarse matrix leaves
/// spd_ok false instead of throwing.
OnlineInstance instantiate(const OfflineStore& store, const Mesh& mesh, const DofPartition& dofs,
                           const Eigen::VectorXd& field, std::uint64_t seed = 0);

/// Interface operator assembled from evaluated expansions, together with
/// the matching right-hand side reduction and interior recovery.
class SurrogateSchur {
 public:
  SurrogateSchur(const OfflineStore& store, const DofPartition& dofs, const OnlineInstance& inst,
                 const Eigen::VectorXd& load);

  const SchurOperator& op() const { return op_; }
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return op_.apply(u); }
  const Eigen::VectorXd& rhs() const { return g_; }
  Eigen::VectorXd recover(const Eigen::VectorXd& u_gamma) const;

 private:
  const DofPartition* dofs_;
  SchurOperator op_;
  Eigen::VectorXd g_;
  // u_I = y[s] - x[s] u_Gamma
  std::vector<Eigen::VectorXd> y_;
  std::vector<Eigen::MatrixXd> x_;
};

}  // namespace sbddc
