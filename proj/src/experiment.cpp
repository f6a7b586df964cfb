#include "xxzcoll/experiment.hpp"

#include <chrono>
#include <ctime>
#include <set>
#include <sstream>
#include <filesystem>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "xxzcoll/errors.hpp"
#include "xxzcoll/hamiltonian.hpp"
#include "xxzcoll/presets.hpp"
#include "xxzcoll/series_io.hpp"
#include "xxzcoll/trajectory.hpp"

#ifndef XXZCOLL_VERSION
#define XXZCOLL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;

namespace xxzcoll {
namespace {

using Clock = std::chrono::steady_clock;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

std::set<std::string> selected_observables(const ExperimentConfig& cfg) {
  return {cfg.output.observables.begin(), cfg.output.observables.end()};
}

std::string join_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

nlohmann::ordered_json parameters_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  std::istringstream in(to_flat(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    j[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return j;
}

nlohmann::ordered_json resolved_json(const PointResult& p) {
  nlohmann::ordered_json r;
  std::vector<int> sites;
  for (int s : p.initial_sites) sites.push_back(s + 1);
  r["n_exc"] = p.n_exc;
  r["dim"] = p.dim;
  r["initial_sites"] = sites;
  r["disorder_fields"] = p.fields;
  r["mu"] = p.mu;
  r["samples"] = p.series.size();
  r["total_collisions"] = p.total_collisions;
  r["max_norm_error"] = p.max_norm_error;
  return r;
}

nlohmann::ordered_json manifest_base(const std::string& command, const RunOptions& opts) {
  nlohmann::ordered_json m;
  m["tool"] = "xxzcoll";
  m["version"] = version_string();
  m["command"] = command;
  m["rng"] = "splitmix64 counter streams keyed by (seed, purpose, trajectory, site)";
  m["threads"] = opts.threads;
  return m;
}

void write_point_files(const PointResult& p, const std::string& dir, const std::string& series_name,
                       const std::string& stderr_name) {
  write_text_file(join_path(dir, series_name), series_csv(p.series, selected_observables(p.config)));
  if (p.series.ier_stderr) write_text_file(join_path(dir, stderr_name), stderr_csv(p.series));
}

}  // namespace

std::string version_string() { return XXZCOLL_VERSION; }

PointResult simulate_point(const ExperimentConfig& cfg, std::size_t threads) {
  validate_config(cfg);
  PointResult p;
  p.config = cfg;
  p.initial_sites = preset_sites(cfg.init.preset, cfg.chain.n_sites, cfg.chain.n_exc, cfg.init.sites);
  p.n_exc = static_cast<int>(p.initial_sites.size());

  auto basis = std::make_shared<const SectorBasis>(cfg.chain.n_sites, p.n_exc);
  p.dim = basis->dim();
  const ChainSpec chain = chain_spec(cfg);
  p.fields = chain.fields;
  SectorHamiltonian H = build_hamiltonian(basis, chain);
  diagonalize(H);
  p.eigenvalues = H.eigenvalues;

  const NoiseSpec noise = noise_spec(cfg);
  p.mu = noise.mu();
  const EnsembleSpec ens = ensemble_spec(cfg);
  TrajectoryEngine engine(H, noise, ens, basis_state(*basis, p.initial_sites));
  EnsembleResult result = engine.run_ensemble(std::max<std::size_t>(1, threads));
  p.total_collisions = result.total_collisions;
  p.max_norm_error = result.max_norm_error;

  if (cfg.output.histogram_bin > 0.0) {
    std::vector<CollisionEvent> all;
    for (const auto& traj : result.events) all.insert(all.end(), traj.begin(), traj.end());
    p.histogram = collision_histogram(all, cfg.chain.n_sites, cfg.output.histogram_bin, ens.t_final);
  }

  SeriesOptions so;
  if (p.n_exc == 1) so.center_site = p.initial_sites.front();
  p.series = compute_series(result, *basis, so);

  const bool use_ipr = cfg.analysis.observable == SeriesObservable::Ipr ||
                       (cfg.analysis.observable == SeriesObservable::Auto && p.n_exc == 1);
  p.observable = use_ipr ? "ipr" : "ier";
  const std::vector<double>& values = use_ipr ? *p.series.ipr : p.series.ier;
  p.final_value = values.back();
  p.report = analyze_series(p.series.times, values, p.dim, cfg.noise.rc, cfg.chain.h, cfg.noise.nu,
                            cfg.analysis.plateau, cfg.analysis.tau_factor);
  p.series.metadata = parameters_json(cfg);
  return p;
}

nlohmann::ordered_json point_report_json(const PointResult& p) {
  const auto& m = p.report.metrics;
  nlohmann::ordered_json j;
  j["h"] = p.config.chain.h;
  j["rc"] = p.config.noise.rc;
  j["nu"] = p.config.noise.nu;
  j["delta"] = p.config.chain.delta;
  j["observable"] = p.observable;
  j["dim"] = p.dim;
  j["D"] = m.D;
  j["Z_J"] = m.Z_J;
  j["height"] = m.height;
  j["area"] = m.area;
  j["P_h"] = m.P_h;
  j["P_h_scaled"] = m.P_h_scaled;
  j["tau"] = p.report.tau.time;
  j["beyond_horizon"] = p.report.tau.beyond_horizon;
  j["horizon"] = p.series.times.back();
  j["final_value"] = p.final_value;
  nlohmann::ordered_json pls = nlohmann::ordered_json::array();
  for (const auto& pl : p.report.plateaus) {
    pls.push_back({{"t_start", pl.t_start}, {"t_end", pl.t_end}, {"height", pl.height}, {"jump", pl.jump}});
  }
  j["plateaus"] = pls;
  const auto& pc = p.config.analysis.plateau;
  j["analysis"] = {{"window", pc.window},       {"slope", pc.slope},         {"dmin", pc.d_min},
                   {"min_jump", pc.min_jump},   {"contrast", pc.contrast},   {"max_trend", pc.max_trend},
                   {"tau_factor", p.config.analysis.tau_factor}};
  j["params"] = parameters_json(p.config);
  return j;
}

std::string report_csv_header() {
  return "h,rc,nu,delta,D,Z_J,area,P_h,tau,horizon_flag,P_h_scaled,height,final_value,series\n";
}

std::string report_csv_row(const PointResult& p, const std::string& series_file) {
  const auto& m = p.report.metrics;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", p.config.chain.h, p.config.noise.rc,
                     p.config.noise.nu, p.config.chain.delta, m.D, m.Z_J, m.area, m.P_h, p.report.tau.time,
                     p.report.tau.beyond_horizon ? 1 : 0, m.P_h_scaled, m.height, p.final_value, series_file);
}

void prepare_output_dir(const std::string& dir, bool force) {
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw OutputExistsError(fmt::format("{} exists and is not a directory", dir));
    if (!fs::is_empty(dir, ec) && !force) {
      throw OutputExistsError(fmt::format("output directory {} is not empty (use --force to overwrite)", dir));
    }
    return;
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create {}: {}", dir, ec.message()));
}

PointResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, const RunOptions& opts) {
  validate_config(cfg);
  prepare_output_dir(out_dir, opts.force);
  const auto t0 = Clock::now();
  PointResult p = simulate_point(cfg, opts.threads);
  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();

  std::vector<std::string> files{"series.csv"};
  write_point_files(p, out_dir, "series.csv", "stderr.csv");
  if (p.series.ier_stderr) files.emplace_back("stderr.csv");
  write_text_file(join_path(out_dir, "report.json"), point_report_json(p).dump(2) + "\n");
  write_text_file(join_path(out_dir, "report.csv"), report_csv_header() + report_csv_row(p, "series.csv"));
  files.insert(files.end(), {"report.json", "report.csv"});
  if (cfg.output.eigenvalues) {
    write_text_file(join_path(out_dir, "eigenvalues.csv"), eigenvalues_csv(p.eigenvalues));
    files.emplace_back("eigenvalues.csv");
  }
  if (p.histogram) {
    write_text_file(join_path(out_dir, "histogram.csv"), histogram_csv(*p.histogram));
    files.emplace_back("histogram.csv");
  }

  auto m = manifest_base("run", opts);
  m["config"] = to_flat(cfg);
  m["parameters"] = parameters_json(cfg);
  m["seeds"] = {{"disorder", cfg.chain.disorder_seed}, {"noise", cfg.noise.seed}};
  m["resolved"] = resolved_json(p);
  m["files"] = files;
  m["wall_time_s"] = wall;
  m["timestamp"] = utc_timestamp();
  write_text_file(join_path(out_dir, "manifest.json"), m.dump(2) + "\n");
  return p;
}

ExperimentConfig apply_point(const ExperimentConfig& base,
                             const std::vector<std::pair<std::string, std::string>>& point) {
  ExperimentConfig cfg = base;
  for (const auto& [key, value] : point) set_config_value(cfg, key, value);
  validate_config(cfg);
  return cfg;
}

std::vector<PointResult> run_sweep(const ExperimentConfig& base, const std::vector<GridAxis>& axes,
                                   const std::string& out_dir, const RunOptions& opts) {
  validate_config(base);
  const auto points = grid_points(axes);
  std::vector<ExperimentConfig> configs;
  configs.reserve(points.size());
  for (const auto& pt : points) configs.push_back(apply_point(base, pt));
  prepare_output_dir(out_dir, opts.force);

  const auto t0 = Clock::now();
  const int width = std::max<int>(3, static_cast<int>(std::to_string(points.size()).size()));
  std::vector<PointResult> results;
  std::string summary = report_csv_header();
  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  nlohmann::ordered_json point_list = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string series_name = fmt::format("series_{:0{}}.csv", i, width);
    const std::string stderr_name = fmt::format("stderr_{:0{}}.csv", i, width);
    PointResult p = simulate_point(configs[i], opts.threads);
    write_point_files(p, out_dir, series_name, stderr_name);
    if (p.histogram) {
      write_text_file(join_path(out_dir, fmt::format("histogram_{:0{}}.csv", i, width)), histogram_csv(*p.histogram));
    }
    summary += report_csv_row(p, series_name);
    auto rj = point_report_json(p);
    rj["series"] = series_name;
    reports.push_back(std::move(rj));
    nlohmann::ordered_json pj;
    pj["index"] = i;
    pj["series"] = series_name;
    for (const auto& [k, v] : points[i]) pj["values"][k] = v;
    pj["resolved"] = resolved_json(p);
    point_list.push_back(std::move(pj));
    results.push_back(std::move(p));
  }
  const double wall = std::chrono::duration<double>(Clock::now() - t0).count();

  write_text_file(join_path(out_dir, "summary.csv"), summary);
  write_text_file(join_path(out_dir, "reports.json"), reports.dump(2) + "\n");

  std::string grid_text;
  for (const auto& a : axes) grid_text += fmt::format("{} = {}\n", a.key, fmt::join(a.values, ", "));
  auto m = manifest_base("sweep", opts);
  m["config"] = to_flat(base);
  m["grid"] = grid_text;
  m["parameters"] = parameters_json(base);
  m["seeds"] = {{"disorder", base.chain.disorder_seed}, {"noise", base.noise.seed}};
  m["points"] = point_list;
  m["wall_time_s"] = wall;
  m["timestamp"] = utc_timestamp();
  write_text_file(join_path(out_dir, "manifest.json"), m.dump(2) + "\n");
  return results;
}

ExperimentConfig load_config_or_manifest(const std::string& path, const EnvLookup& env,
                                         std::optional<std::string>* grid) {
  const std::string text = read_text_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json m;
    try {
      m = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path, fmt::format("invalid manifest JSON: {}", e.what()));
    }
    if (!m.contains("config") || !m["config"].is_string()) {
      throw ConfigError(path, "manifest has no 'config' text");
    }
    if (grid != nullptr && m.contains("grid") && m["grid"].is_string()) *grid = m["grid"].get<std::string>();
    return parse_config(m["config"].get<std::string>(), env);
  }
  return parse_config(text, env);
}

}  // namespace xxzcoll
