#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "xxzcoll/collision_noise.hpp"
#include "xxzcoll/config.hpp"
#include "xxzcoll/observables.hpp"
#include "xxzcoll/plateau.hpp"

namespace xxzcoll {

std::string version_string();

// Refused output directory (exists and is not empty, no --force).
class OutputExistsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunOptions {
  bool force = false;
  std::size_t threads = 1;
};

/// Everything computed for one parameter point.
struct PointResult {
  ExperimentConfig config;
  std::vector<int> initial_sites;  // 0-based
  int n_exc = 0;
  std::size_t dim = 0;
  std::vector<double> fields;
  Eigen::VectorXd eigenvalues;
  double mu = 0.0;
  ObservableSeries series;
  std::string observable;  // "ipr" or "ier"
  PlateauReport report;
  double final_value = 0.0;
  std::optional<CollisionHistogram> histogram;
  std::uint64_t total_collisions = 0;
  double max_norm_error = 0.0;
};

// Builds the chain, runs the ensemble and analyzes the chosen observable.
PointResult simulate_point(const ExperimentConfig& cfg, std::size_t threads = 1);

nlohmann::ordered_json point_report_json(const PointResult& p);

// Flat report rows: h, rc, nu, delta, D, Z_J, area, P_h, tau, horizon_flag,
// followed by P_h_scaled, height, final_value, series.
std::string report_csv_header();
std::string report_csv_row(const PointResult& p, const std::string& series_file);

// Creates `dir` if needed; throws OutputExistsError when it holds files and
// `force` is false.
void prepare_output_dir(const std::string& dir, bool force);

// Writes series.csv, stderr.csv, report.json, report.csv, manifest.json and,
// when enabled, eigenvalues.csv and histogram.csv.
PointResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, const RunOptions& opts);

// One series_NNN.csv per grid point plus summary.csv, reports.json and
// manifest.json. Every point is validated before any is run.
std::vector<PointResult> run_sweep(const ExperimentConfig& base, const std::vector<GridAxis>& axes,
                                   const std::string& out_dir, const RunOptions& opts);

// Applies one grid point to a copy of `base` and validates it.
ExperimentConfig apply_point(const ExperimentConfig& base,
                             const std::vector<std::pair<std::string, std::string>>& point);

// Accepts a flat config file or a manifest.json written by run/sweep. For a
// sweep manifest the stored grid is returned through `grid` when non-null.
ExperimentConfig load_config_or_manifest(const std::string& path, const EnvLookup& env,
                                         std::optional<std::string>* grid = nullptr);

}  // namespace xxzcoll
