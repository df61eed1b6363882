#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cca/lattice1d.hpp"
#include "cca/latticed.hpp"

namespace cca {

struct EnsembleConfig {
  std::variant<Config1D, ConfigD> base;
  std::size_t replicas = 1;
  std::uint64_t master_seed = 0;
  std::size_t parallelism = 1;
  std::filesystem::path output_path;

  void validate() const;
};

struct ReplicaResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  ObservationSeries series;
  std::string error; // non-empty when the replica failed

  friend bool operator==(const ReplicaResult &,
                         const ReplicaResult &) = default;
};

struct FlagCounts {
  std::size_t contaminated = 0;
  std::size_t saturated = 0;
  std::size_t empty = 0;
  std::size_t numerically_coalesced = 0;
  std::size_t failed = 0;

  friend bool operator==(const FlagCounts &, const FlagCounts &) = default;
};

struct EnsembleResult {
  std::vector<ReplicaResult> replicas; // ordered by index
  std::string config_digest;
  FlagCounts counts;

  void recount();
};

/// Config echo used for the digest and the summary sidecar. Parallelism and
/// the output path are left out: they do not affect the result.
nlohmann::json config_json(const EnsembleConfig &config);

/// FNV-1a 64 of the canonical config echo, as 16 hex digits.
std::string config_digest(const EnsembleConfig &config);

/// Runs every replica with seed derive_replica_seed(master_seed, index).
/// A replica that throws is recorded with its error; the others proceed.
EnsembleResult run_ensemble(const EnsembleConfig &config);

/// CSV with header replica,seed,t,c0_size,n_clusters,max_size,contaminated,
/// saturated; one row per (replica, observation time).
void write_csv(const EnsembleResult &result, const std::filesystem::path &path);
std::string to_csv(const EnsembleResult &result);

/// Inverse of `write_csv`. Throws SchemaMismatch naming the first missing
/// column; the digest is not stored in the CSV and comes back empty.
EnsembleResult read_csv(const std::filesystem::path &path);
EnsembleResult from_csv(const std::string &text);

/// JSON sidecar: config echo, digest, replica count and flag counts.
nlohmann::json summary_json(const EnsembleConfig &config,
                            const EnsembleResult &result);

/// Shortest decimal that reads back to the same double.
std::string format_real(double x);

} // namespace cca
