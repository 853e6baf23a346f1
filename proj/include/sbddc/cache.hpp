#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "sbddc/random_field.hpp"
#include "sbddc/stoch_offline.hpp"

namespace sbddc {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& s);

/// Canonical key strings identifying cached artifacts.
std::string kl_cache_key(int ns, int n, const CovarianceSpec& spec, int m, bool global);
std::string offline_cache_key(int ns, int n, const CovarianceSpec& spec, const OfflineOptions& opts);

/// Binary files: magic, format version, key hash and key, payload. Loading
/// returns nothing when the file is missing, from another version or built
/// for another key.
void save_kl(const std::filesystem::path& file, const std::string& key, const KLBasis& basis);
std::optional<KLBasis> load_kl(const std::filesystem::path& file, const std::string& key);

void save_offline(const std::filesystem::path& file, const OfflineStore& store);
std::optional<OfflineStore> load_offline(const std::filesystem::path& file, const std::string& key);

/// Global KL basis, read from or written to dir when dir is not empty.
KLBasis cached_global_kl(const std::filesystem::path& dir, const Mesh& mesh, const CovarianceSpec& spec, int m);

/// Offline store, read from or written to dir when dir is not empty.
OfflineStore cached_offline(const std::filesystem::path& dir, const Mesh& mesh, const DofPartition& dofs,
                            const CovarianceSpec& spec, const OfflineOptions& opts,
                            const Eigen::VectorXd& load = {});

}  // namespace sbddc
