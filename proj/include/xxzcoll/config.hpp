#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xxzcoll/collision_noise.hpp"
#include "xxzcoll/hamiltonian.hpp"
#include "xxzcoll/plateau.hpp"
#include "xxzcoll/trajectory.hpp"

namespace xxzcoll {

// Flat `section.key = value` configuration. Site lists are 1-based, as in
// the CSV output; everything is converted to 0-based when specs are built.
struct ChainConfig {
  int n_sites = 0;  // mandatory
  std::optional<int> n_exc;
  double J = 1.0;
  double delta = 0.0;
  double h = 0.0;
  std::uint64_t disorder_seed = 1;
  std::vector<double> fields;  // explicit h_i; empty means drawn from the seed
};

struct NoiseConfig {
  double nu = 1.0;
  double rc = 0.0;
  std::uint64_t seed = 1;
  std::vector<int> sites;  // empty means every site collides
};

struct EnsembleConfig {
  std::size_t n_traj = 100;
  double dt = 0.02;
  double t_final = 30.0;
  EntropyMode entropy_mode = EntropyMode::TrajectoryAverage;
  int cut = 0;            // 0 disables S_vN
  double log_base = 0.0;  // 0 is the natural log
  bool error_bars = true;
};

struct InitConfig {
  std::string preset;      // mandatory
  std::vector<int> sites;  // explicit_sites only
};

enum class SeriesObservable { Auto, Ipr, Ier };

struct AnalysisConfig {
  SeriesObservable observable = SeriesObservable::Auto;
  PlateauConfig plateau;
  double tau_factor = 10.0;
};

struct OutputConfig {
  bool eigenvalues = false;
  double histogram_bin = 0.0;  // 0 disables the collision histogram
  std::vector<std::string> observables{"ipr", "ier", "imb", "svn", "density"};
};

struct ExperimentConfig {
  ChainConfig chain;
  NoiseConfig noise;
  EnsembleConfig ensemble;
  InitConfig init;
  AnalysisConfig analysis;
  OutputConfig output;
};

// Returns the value of an environment variable, if set.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Environment overrides use this prefix plus the upper-cased key with dots
// replaced by underscores: noise.rc -> XXZCOLL_NOISE_RC.
inline constexpr std::string_view kEnvPrefix = "XXZCOLL_";
std::string env_name(std::string_view key);

// Parses and validates. Throws ConfigError naming the offending key for
// unknown or duplicate keys, malformed values, missing mandatory keys and
// failed validation. Environment overrides are applied after the text.
ExperimentConfig parse_config(std::string_view text, const EnvLookup& env = {});
ExperimentConfig load_config_file(const std::string& path, const EnvLookup& env = process_env());

// Sets a single key from its textual value (no validation across keys).
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);
// Full cross-key validation; throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

// Canonical `key = value` listing of every key, parseable by parse_config.
std::string to_flat(const ExperimentConfig& cfg);
std::vector<std::string> config_keys();
bool is_list_key(std::string_view key);

// Sweep grid: one `key = v1, v2, ...` line per swept key. Points are the
// Cartesian product, first key varying slowest.
struct GridAxis {
  std::string key;
  std::vector<std::string> values;
};
std::vector<GridAxis> parse_grid(std::string_view text);
std::vector<std::vector<std::pair<std::string, std::string>>> grid_points(const std::vector<GridAxis>& axes);

// Spec builders. Sites in the config are 1-based; specs use 0-based sites.
ChainSpec chain_spec(const ExperimentConfig& cfg);
NoiseSpec noise_spec(const ExperimentConfig& cfg);
EnsembleSpec ensemble_spec(const ExperimentConfig& cfg);

std::string format_double(double v);

}  // namespace xxzcoll
