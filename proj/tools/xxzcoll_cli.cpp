// xxzcoll command-line front end: run, sweep, analyze, preset.
#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <thread>

#include "xxzcoll/config.hpp"
#include "xxzcoll/errors.hpp"
#include "xxzcoll/experiment.hpp"
#include "xxzcoll/plateau.hpp"
#include "xxzcoll/presets.hpp"
#include "xxzcoll/sector_basis.hpp"
#include "xxzcoll/series_io.hpp"

namespace fs = std::filesystem;
using namespace xxzcoll;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::size_t default_threads() { return std::max(1U, std::thread::hardware_concurrency()); }

struct AnalyzeArgs {
  std::string series;
  PlateauConfig plateau;
  double rc = 0.0;
  double h = 0.0;
  double nu = 1.0;
  double tau_factor = 10.0;
  std::string observable = "auto";
  std::string out;
};

int cmd_run(const std::string& config_path, const std::string& out, const RunOptions& opts) {
  const ExperimentConfig cfg = load_config_or_manifest(config_path, process_env());
  const PointResult p = run_experiment(cfg, out, opts);
  fmt::print("{}: {} = {:.4g} at t = {}, D = {}, tau = {}{}\n", out, p.observable, p.final_value,
             p.series.times.back(), p.report.metrics.D, p.report.tau.time,
             p.report.tau.beyond_horizon ? " (beyond horizon)" : "");
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_path, const std::string& out,
              const RunOptions& opts) {
  std::optional<std::string> stored_grid;
  const ExperimentConfig base = load_config_or_manifest(config_path, process_env(), &stored_grid);
  std::string grid_text;
  if (!grid_path.empty()) {
    grid_text = read_text_file(grid_path);
  } else if (stored_grid) {
    grid_text = *stored_grid;
  } else {
    throw ConfigError("grid", "sweep needs --grid unless --config is a sweep manifest");
  }
  const auto results = run_sweep(base, parse_grid(grid_text), out, opts);
  fmt::print("{}: {} points written\n", out, results.size());
  return 0;
}

int cmd_analyze(const AnalyzeArgs& a) {
  const SeriesTable table = read_series_csv(a.series);
  if (!table.has("t")) throw IoError(fmt::format("{}: no 't' column", a.series));
  const int n_sites = table.n_sites();
  if (n_sites == 0) throw IoError(fmt::format("{}: no n_i density columns", a.series));
  const auto times = table.dense("t");
  if (times.empty()) throw IoError(fmt::format("{}: no data rows", a.series));

  double total = 0.0;
  for (int i = 1; i <= n_sites; ++i) total += table.dense(fmt::format("n_{}", i)).front();
  const int n_exc = static_cast<int>(std::lround(total));
  if (n_exc < 1 || n_exc > n_sites) throw IoError(fmt::format("{}: density sums to {}", a.series, total));
  const std::size_t dim = binomial(n_sites, n_exc);

  std::string obs = a.observable;
  if (obs == "auto") {
    const auto it = table.columns.find("ipr");
    const bool ipr_ok = it != table.columns.end() && !it->second.empty() && it->second.front().has_value();
    obs = ipr_ok ? "ipr" : "ier";
  }
  const auto values = table.dense(obs);
  const PlateauReport rep = analyze_series(times, values, dim, a.rc, a.h, a.nu, a.plateau, a.tau_factor);

  nlohmann::ordered_json j;
  j["series"] = a.series;
  j["observable"] = obs;
  j["n_sites"] = n_sites;
  j["n_exc"] = n_exc;
  j["dim"] = dim;
  j["D"] = rep.metrics.D;
  j["Z_J"] = rep.metrics.Z_J;
  j["height"] = rep.metrics.height;
  j["area"] = rep.metrics.area;
  j["P_h"] = rep.metrics.P_h;
  j["P_h_scaled"] = rep.metrics.P_h_scaled;
  j["tau"] = rep.tau.time;
  j["beyond_horizon"] = rep.tau.beyond_horizon;
  j["plateaus"] = nlohmann::ordered_json::array();
  for (const auto& pl : rep.plateaus) {
    j["plateaus"].push_back({{"t_start", pl.t_start}, {"t_end", pl.t_end}, {"height", pl.height}, {"jump", pl.jump}});
  }
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
  }
  return 0;
}

int cmd_preset(const std::string& name, const std::string& out, bool paper, bool list, const RunOptions& opts) {
  if (list) {
    for (const auto& p : preset_catalog()) {
      fmt::print("{:8} {} ({})\n", p.name, p.description, p.runtime);
    }
    return 0;
  }
  if (name.empty()) throw ConfigError("name", "preset needs --name (or --list)");
  if (out.empty()) throw ConfigError("out", "preset needs --out");
  const FigurePreset& preset = find_preset(name);
  const bool desk = !paper;
  const std::string config_text = preset.config_text(desk);
  const std::string grid_text = preset.grid_text(desk);

  ExperimentConfig cfg = parse_config(config_text, process_env());
  const auto axes = parse_grid(grid_text);
  // validate before touching the directory
  for (const auto& pt : grid_points(axes)) apply_point(cfg, pt);
  prepare_output_dir(out, opts.force);
  write_text_file((fs::path(out) / "config.cfg").string(), config_text);
  RunOptions inner = opts;
  inner.force = true;
  if (axes.empty()) {
    run_experiment(cfg, out, inner);
    fmt::print("{}: preset {} ({}) written\n", out, name, desk ? "desk" : "paper");
  } else {
    write_text_file((fs::path(out) / "grid.cfg").string(), grid_text);
    const auto results = run_sweep(cfg, axes, out, inner);
    fmt::print("{}: preset {} ({}), {} points written\n", out, name, desk ? "desk" : "paper", results.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disordered XXZ chain with stochastic collisions"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  RunOptions opts;
  opts.threads = default_threads();

  std::string config_path, out_dir, grid_path;
  auto* run = app.add_subcommand("run", "simulate one parameter point");
  run->add_option("--config", config_path, "flat config file or manifest.json")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_flag("--force", opts.force, "write into a non-empty directory");
  run->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "run a grid of parameter points");
  sweep->add_option("--config", config_path, "base config or sweep manifest.json")->required();
  sweep->add_option("--grid", grid_path, "grid file (key = v1, v2, ...)");
  sweep->add_option("--out", out_dir, "output directory")->required();
  sweep->add_flag("--force", opts.force, "write into a non-empty directory");
  sweep->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "plateau and delocalization analysis of a series CSV");
  analyze->add_option("--series", an.series, "series CSV")->required();
  analyze->add_option("--window", an.plateau.window, "moving-average width in samples");
  analyze->add_option("--slope", an.plateau.slope, "flatness threshold per unit time, relative to range");
  analyze->add_option("--dmin", an.plateau.d_min, "minimum plateau duration");
  analyze->add_option("--min-jump", an.plateau.min_jump, "minimum level shift, relative to range");
  analyze->add_option("--contrast", an.plateau.contrast, "minimum shift over pooled spread");
  analyze->add_option("--max-trend", an.plateau.max_trend, "maximum R^2 of a trend inside a plateau");
  analyze->add_option("--rc", an.rc, "collision rate used for area and P_h");
  analyze->add_option("--disorder", an.h, "disorder range h used for P_h");
  analyze->add_option("--nu", an.nu, "Weibull shape used for the scaled P_h");
  analyze->add_option("--tau-factor", an.tau_factor, "delocalization threshold is factor/dim");
  analyze->add_option("--observable", an.observable, "ipr, ier or auto")
      ->check(CLI::IsMember({"auto", "ipr", "ier"}));
  analyze->add_option("--out", an.out, "write the JSON report here instead of stdout");

  std::string preset_name;
  bool paper = false, desk = false, list = false;
  auto* preset = app.add_subcommand("preset", "run a named figure preset");
  preset->add_option("--name", preset_name, "preset name");
  preset->add_option("--out", out_dir, "output directory");
  auto* desk_flag = preset->add_flag("--desk", desk, "reduced ensemble and grid (default)");
  preset->add_flag("--paper", paper, "full paper-scale parameters")->excludes(desk_flag);
  preset->add_flag("--list", list, "list presets and exit");
  preset->add_flag("--force", opts.force, "write into a non-empty directory");
  preset->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, opts);
    if (*sweep) return cmd_sweep(config_path, grid_path, out_dir, opts);
    if (*analyze) return cmd_analyze(an);
    if (*preset) return cmd_preset(preset_name, out_dir, paper, list, opts);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kExitValidation;
  } catch (const OutputExistsError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitValidation;
  } catch (const ParameterError& e) {
    fmt::print(stderr, "invalid parameter: {}\n", e.what());
    return kExitValidation;
  } catch (const ContractError& e) {
    fmt::print(stderr, "invalid request: {}\n", e.what());
    return kExitValidation;
  } catch (const IoError& e) {
    fmt::print(stderr, "I/O error: {}\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitValidation;
}
