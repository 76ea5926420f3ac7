#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mixclips/clips.hpp"
#include "mixclips/run_config.hpp"

namespace mixclips {

/// Command-line flags; each one, when set, overrides the config file.
struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> chains;
  std::optional<int> kplus;
  std::optional<double> min_fill;
  std::optional<std::string> functional;
  std::optional<int> restarts;
  std::optional<std::filesystem::path> input;  // store (clips) or clips.json (report)
  std::optional<std::filesystem::path> truth;
};

/// Config file (if any) with the overrides applied.
RunConfig resolve_config(const Overrides& flags);

/// Loads the CSV or runs the generator. `sim` receives the simulation when a
/// generator is used.
Dataset load_source(const RunConfig& rc, Simulated* sim = nullptr);

// Output files inside the output directory.
inline constexpr const char* kDataFile = "data.csv";
inline constexpr const char* kTruthFile = "truth.json";
inline constexpr const char* kStoreFile = "draws.jsonl";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kClipsFile = "clips.json";
inline constexpr const char* kPprFile = "ppr.csv";
inline constexpr const char* kPartitionFile = "partition.csv";
inline constexpr const char* kReportFile = "report.txt";

/// Store file name of chain `c` (0-based); chain 0 of a single-chain run is draws.jsonl.
std::string store_file_name(int chain, int chains);

void save_clips_result(const ClipsResult& result, KernelKind kernel, std::size_t n_obs,
                       const std::filesystem::path& path);
void save_ppr_csv(const ClipsResult& result, const std::filesystem::path& path);
void save_partition_csv(const std::vector<int>& partition, const std::filesystem::path& path);

int cmd_simulate(const Overrides& flags, std::ostream& log);
int cmd_fit(const Overrides& flags, std::ostream& log);
int cmd_clips(const Overrides& flags, std::ostream& log);
int cmd_report(const Overrides& flags, std::ostream& log);

}  // namespace mixclips
