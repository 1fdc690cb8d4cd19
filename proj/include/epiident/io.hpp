#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epiident/coverage.hpp"
#include "epiident/distfit.hpp"
#include "epiident/gillespie.hpp"
#include "epiident/identify.hpp"
#include "epiident/residuals.hpp"
#include "epiident/synth.hpp"
#include "epiident/types.hpp"

namespace epiident {

inline constexpr const char* kToolVersion = "0.1.0";

/// Trajectory CSV with header `t,I` (plus S,R columns when states given).
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const SirSolution& sol,
                          bool include_states);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

/// Ensemble CSV with columns `run_id,t,I`.
void write_ensemble_csv(const std::filesystem::path& path, const Ensemble& ensemble);

/// ResidualBank: CSV `bin_index,phase,residual` + JSON sidecar with bin edges
/// and scenario; lossless round-trip.
void write_residual_bank(const std::filesystem::path& csv_path, const ResidualBank& bank);
ResidualBank read_residual_bank(const std::filesystem::path& csv_path);

/// WarpDistribution: CSV `a,dt` + JSON sidecar with bandwidths; lossless.
void write_warp_distribution(const std::filesystem::path& csv_path, const WarpDistribution& dist);
WarpDistribution read_warp_distribution(const std::filesystem::path& csv_path);

void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<std::pair<double, double>>& estimates);

struct ManifestStep {
  std::string name;
  int exclusions = 0;
};

/// Self-describing run manifest, written before results are finalized and
/// refreshed with the end timestamp at completion. Keys are emitted in a
/// stable order.
struct RunManifest {
  std::string command_line;
  std::uint64_t master_seed = kDefaultMasterSeed;
  std::string tool_version = kToolVersion;
  std::string prng_name = kPrngName;
  std::string prng_version = kPrngVersion;
  std::vector<std::pair<std::string, std::string>> scenario_hashes;
  std::string started_at;
  std::string finished_at;
  std::vector<ManifestStep> steps;

  void write(const std::filesystem::path& path) const;
};

std::string utc_timestamp();
std::string fnv1a_hex(const std::string& text);

}  // namespace epiident
