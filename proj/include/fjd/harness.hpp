#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fjd/grid.hpp"
#include "fjd/kernel.hpp"

namespace fjd::harness {

using nlohmann::json;

/// Public exit-code contract of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitComparison = 4,
  kExitChecks = 5,
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InitialDensity {
  std::string type = "uniform";  // uniform | gaussian-bump
  double kappa = 1.0;
  double base = 0.0;
  double amplitude = 1.0;
  double width = 1.0;
  std::vector<double> center;  // defaults to the box centre
};

struct KernelConfig {
  std::string shape;  // gaussian | uniform-ball | table
  double alpha = 1.0;
  double sigma = 0.0;
  double radius = 0.0;
  std::vector<double> table;
};

struct HierarchyConfig {
  int order = 2;
  double theta = 0.0;
  InitialDensity initial;
};

struct TimeConfig {
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t snapshot_every = 0;
  double max_dt_alpha = 0.5;
};

struct SimConfig {
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  double horizon = 1.0;
  std::vector<int> orders{1};
  std::string compare = "exact";  // exact | self | none
  bool write_replicas = false;
};

struct MomentFixture {
  std::string name;
  std::vector<Index> window;
  std::vector<double> values;  // indexed by subset bit mask
};

struct ChecksConfig {
  std::uint64_t seed = 0;
  int trials = 20;
  std::vector<std::string> battery{"conservation", "domination", "power_bound", "moment"};
  std::vector<MomentFixture> moment_fixtures;
};

struct ExperimentConfig {
  std::optional<GridSpec> grid;
  std::optional<KernelConfig> kernel;
  std::optional<HierarchyConfig> hierarchy;
  std::optional<TimeConfig> time;
  std::optional<SimConfig> sim;
  std::optional<ChecksConfig> checks;
  std::string output_path = ".";

  /// Config with every default filled in; reloading it reproduces this object.
  json resolved() const;
};

/// Parses and validates a config document. Unknown sections or keys and
/// wrongly typed values raise ConfigError naming the offending key.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

KernelShape kernel_shape(const KernelConfig& k);
Eigen::VectorXd build_density(const InitialDensity& init, const GridSpec& grid);

/// FNV-1a 64-bit hash rendered as 16 hex digits.
std::string fingerprint(const std::string& text);

struct RunOptions {
  std::filesystem::path out_dir;  // empty: use output.path from the config
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool quiet = false;
};

/// Loads the config, runs the named subcommand (evolve | simulate | checks |
/// kernel-make), writes the resolved config and a manifest, returns the exit code.
int run(const std::string& command, const std::filesystem::path& config_path,
        const RunOptions& opts);

int run(const std::string& command, const json& config_doc, const RunOptions& opts);

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fjd::harness
