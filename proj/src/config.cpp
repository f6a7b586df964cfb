#include "xxzcoll/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <sstream>

#include "xxzcoll/errors.hpp"
#include "xxzcoll/presets.hpp"

namespace xxzcoll {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  s = trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = trim(s.substr(1, s.size() - 2));
  if (s.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = s.find(',', pos);
    out.push_back(unquote(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text, std::string_view what) {
  const std::string s = unquote(text);
  T v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size()) {
    throw ConfigError(std::string(key), fmt::format("expected {}, got '{}'", what, s));
  }
  return v;
}

double parse_double(std::string_view key, std::string_view text) {
  const double v = parse_number<double>(key, text, "a number");
  if (!std::isfinite(v)) throw ConfigError(std::string(key), "value must be finite");
  return v;
}

int parse_int(std::string_view key, std::string_view text) { return parse_number<int>(key, text, "an integer"); }

std::uint64_t parse_u64(std::string_view key, std::string_view text) {
  return parse_number<std::uint64_t>(key, text, "a non-negative integer");
}

bool parse_bool(std::string_view key, std::string_view text) {
  std::string s = unquote(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ConfigError(std::string(key), fmt::format("expected true or false, got '{}'", s));
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

std::string join_ints(const std::vector<int>& v) { return fmt::format("{}", fmt::join(v, ", ")); }

struct Field {
  const char* key;
  bool mandatory;
  bool list;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

std::string entropy_mode_name(EntropyMode m) {
  return m == EntropyMode::AveragedState ? "averaged" : "trajectory";
}

std::string observable_name(SeriesObservable o) {
  switch (o) {
    case SeriesObservable::Ipr: return "ipr";
    case SeriesObservable::Ier: return "ier";
    default: return "auto";
  }
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"chain.n_sites", true, false,
                 [](ExperimentConfig& c, std::string_view v) { c.chain.n_sites = parse_int("chain.n_sites", v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.chain.n_sites); }});
    f.push_back({"chain.n_exc", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   if (trim(v).empty()) {
                     c.chain.n_exc.reset();
                   } else {
                     c.chain.n_exc = parse_int("chain.n_exc", v);
                   }
                 },
                 [](const ExperimentConfig& c) { return c.chain.n_exc ? std::to_string(*c.chain.n_exc) : ""; }});
    f.push_back({"chain.J", false, false,
                 [](ExperimentConfig& c, std::string_view v) { c.chain.J = parse_double("chain.J", v); },
                 [](const ExperimentConfig& c) { return format_double(c.chain.J); }});
    f.push_back({"chain.delta", false, false,
                 [](ExperimentConfig& c, std::string_view v) { c.chain.delta = parse_double("chain.delta", v); },
                 [](const ExperimentConfig& c) { return format_double(c.chain.delta); }});
    f.push_back({"chain.h", false, false,
                 [](ExperimentConfig& c, std::string_view v) { c.chain.h = parse_double("chain.h", v); },
                 [](const ExperimentConfig& c) { return format_double(c.chain.h); }});
    f.push_back({"chain.disorder_seed", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.chain.disorder_seed = parse_u64("chain.disorder_seed", v);
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.chain.disorder_seed); }});
    f.push_back({"chain.fields", false, true,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.chain.fields.clear();
                   for (const auto& item : split_list(v)) c.chain.fields.push_back(parse_double("chain.fields", item));
                 },
                 [](const ExperimentConfig& c) { return join_doubles(c.chain.fields); }});
    f.push_back({"noise.nu", false, false,
                 [](ExperimentConfig& c, std::string_view v) { c.noise.nu = parse_double("noise.nu", v); },
                 [](const ExperimentConfig& c) { return format_double(c.noise.nu); }});
    f.push_back({"noise.rc", false, false,
                 [](ExperimentConfig& c, std::string_view v) { c.noise.rc = parse_double("noise.rc", v); },
                 [](const ExperimentConfig& c) { return format_double(c.noise.rc); }});
    f.push_back({"noise.seed", false, false,
                 [](ExperimentConfig& c, std::string_view v) { c.noise.seed = parse_u64("noise.seed", v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.noise.seed); }});
    f.push_back({"noise.sites", false, true,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.noise.sites.clear();
                   for (const auto& item : split_list(v)) c.noise.sites.push_back(parse_int("noise.sites", item));
                 },
                 [](const ExperimentConfig& c) { return join_ints(c.noise.sites); }});
    f.push_back({"ensemble.n_traj", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.ensemble.n_traj = static_cast<std::size_t>(parse_u64("ensemble.n_traj", v));
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.ensemble.n_traj); }});
    f.push_back({"ensemble.dt", false, false,
                 [](ExperimentConfig& c, std::string_view v) { c.ensemble.dt = parse_double("ensemble.dt", v); },
                 [](const ExperimentConfig& c) { return format_double(c.ensemble.dt); }});
    f.push_back({"ensemble.t_final", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.ensemble.t_final = parse_double("ensemble.t_final", v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.ensemble.t_final); }});
    f.push_back({"ensemble.entropy_mode", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   const auto s = unquote(v);
                   if (s == "trajectory") {
                     c.ensemble.entropy_mode = EntropyMode::TrajectoryAverage;
                   } else if (s == "averaged") {
                     c.ensemble.entropy_mode = EntropyMode::AveragedState;
                   } else {
                     throw ConfigError("ensemble.entropy_mode",
                                       fmt::format("expected trajectory or averaged, got '{}'", s));
                   }
                 },
                 [](const ExperimentConfig& c) { return entropy_mode_name(c.ensemble.entropy_mode); }});
    f.push_back({"ensemble.cut", false, false,
                 [](ExperimentConfig& c, std::string_view v) { c.ensemble.cut = parse_int("ensemble.cut", v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.ensemble.cut); }});
    f.push_back({"ensemble.log_base", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   const auto s = unquote(v);
                   c.ensemble.log_base = (s == "e") ? 0.0 : parse_double("ensemble.log_base", s);
                 },
                 [](const ExperimentConfig& c) {
                   return c.ensemble.log_base == 0.0 ? std::string("e") : format_double(c.ensemble.log_base);
                 }});
    f.push_back({"ensemble.error_bars", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.ensemble.error_bars = parse_bool("ensemble.error_bars", v);
                 },
                 [](const ExperimentConfig& c) { return std::string(c.ensemble.error_bars ? "true" : "false"); }});
    f.push_back({"init.preset", true, false,
                 [](ExperimentConfig& c, std::string_view v) { c.init.preset = unquote(v); },
                 [](const ExperimentConfig& c) { return c.init.preset; }});
    f.push_back({"init.sites", false, true,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.init.sites.clear();
                   for (const auto& item : split_list(v)) c.init.sites.push_back(parse_int("init.sites", item));
                 },
                 [](const ExperimentConfig& c) { return join_ints(c.init.sites); }});
    f.push_back({"analysis.observable", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   const auto s = unquote(v);
                   if (s == "auto") {
                     c.analysis.observable = SeriesObservable::Auto;
                   } else if (s == "ipr") {
                     c.analysis.observable = SeriesObservable::Ipr;
                   } else if (s == "ier") {
                     c.analysis.observable = SeriesObservable::Ier;
                   } else {
                     throw ConfigError("analysis.observable", fmt::format("expected auto, ipr or ier, got '{}'", s));
                   }
                 },
                 [](const ExperimentConfig& c) { return observable_name(c.analysis.observable); }});
    f.push_back({"analysis.window", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.analysis.plateau.window = parse_int("analysis.window", v);
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.analysis.plateau.window); }});
    f.push_back({"analysis.slope", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.analysis.plateau.slope = parse_double("analysis.slope", v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.analysis.plateau.slope); }});
    f.push_back({"analysis.dmin", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.analysis.plateau.d_min = parse_double("analysis.dmin", v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.analysis.plateau.d_min); }});
    f.push_back({"analysis.min_jump", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.analysis.plateau.min_jump = parse_double("analysis.min_jump", v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.analysis.plateau.min_jump); }});
    f.push_back({"analysis.contrast", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.analysis.plateau.contrast = parse_double("analysis.contrast", v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.analysis.plateau.contrast); }});
    f.push_back({"analysis.max_trend", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.analysis.plateau.max_trend = parse_double("analysis.max_trend", v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.analysis.plateau.max_trend); }});
    f.push_back({"analysis.tau_factor", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.analysis.tau_factor = parse_double("analysis.tau_factor", v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.analysis.tau_factor); }});
    f.push_back({"output.eigenvalues", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.output.eigenvalues = parse_bool("output.eigenvalues", v);
                 },
                 [](const ExperimentConfig& c) { return std::string(c.output.eigenvalues ? "true" : "false"); }});
    f.push_back({"output.histogram_bin", false, false,
                 [](ExperimentConfig& c, std::string_view v) {
                   c.output.histogram_bin = parse_double("output.histogram_bin", v);
                 },
                 [](const ExperimentConfig& c) { return format_double(c.output.histogram_bin); }});
    f.push_back({"output.observables", false, true,
                 [](ExperimentConfig& c, std::string_view v) { c.output.observables = split_list(v); },
                 [](const ExperimentConfig& c) { return fmt::format("{}", fmt::join(c.output.observables, ", ")); }});
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  };
}

std::string env_name(std::string_view key) {
  std::string out(kEnvPrefix);
  for (char c : key) out += (c == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& f : fields()) out.emplace_back(f.key);
  return out;
}

bool is_list_key(std::string_view key) {
  const Field* f = find_field(key);
  return f != nullptr && f->list;
}

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  const Field* f = find_field(key);
  if (f == nullptr) throw ConfigError(std::string(key), "unknown key");
  f->set(cfg, value);
}

ExperimentConfig parse_config(std::string_view text, const EnvLookup& env) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}", line_no), fmt::format("expected 'key = value', got '{}'", line));
    }
    const std::string key(trim(line.substr(0, eq)));
    if (!seen.insert(key).second) throw ConfigError(key, "duplicate key");
    set_config_value(cfg, key, trim(line.substr(eq + 1)));
  }
  if (env) {
    for (const auto& f : fields()) {
      if (auto v = env(env_name(f.key))) {
        f.set(cfg, *v);
        seen.insert(f.key);
      }
    }
  }
  for (const auto& f : fields()) {
    if (f.mandatory && !seen.contains(f.key)) throw ConfigError(f.key, "missing mandatory key");
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), env);
}

void validate_config(const ExperimentConfig& cfg) {
  const auto& ch = cfg.chain;
  if (ch.n_sites < 1 || ch.n_sites > kMaxSites) {
    throw ConfigError("chain.n_sites", fmt::format("must be in [1, {}], got {}", kMaxSites, ch.n_sites));
  }
  if (ch.h < 0.0) throw ConfigError("chain.h", fmt::format("must be >= 0, got {}", ch.h));
  if (!ch.fields.empty()) {
    if (ch.fields.size() != static_cast<std::size_t>(ch.n_sites)) {
      throw ConfigError("chain.fields", fmt::format("{} values for {} sites", ch.fields.size(), ch.n_sites));
    }
    for (double x : ch.fields) {
      if (std::abs(x) > ch.h) throw ConfigError("chain.fields", fmt::format("|{}| exceeds chain.h = {}", x, ch.h));
    }
  }
  const auto& no = cfg.noise;
  if (no.nu < 0.0) throw ConfigError("noise.nu", fmt::format("must be >= 0, got {}", no.nu));
  if (no.rc < 0.0) throw ConfigError("noise.rc", fmt::format("must be >= 0, got {}", no.rc));
  for (int s : no.sites) {
    if (s < 1 || s > ch.n_sites) throw ConfigError("noise.sites", fmt::format("site {} outside 1..{}", s, ch.n_sites));
  }
  try {
    (void)NoiseSpec::make(no.nu, no.rc, no.seed);
  } catch (const ParameterError& e) {
    throw ConfigError("noise.nu", e.what());
  }
  const auto& en = cfg.ensemble;
  if (en.n_traj < 1) throw ConfigError("ensemble.n_traj", "must be >= 1");
  if (!(en.dt > 0.0)) throw ConfigError("ensemble.dt", fmt::format("must be > 0, got {}", en.dt));
  if (!(en.t_final >= en.dt)) {
    throw ConfigError("ensemble.t_final", fmt::format("must be >= ensemble.dt, got {}", en.t_final));
  }
  if (en.cut < 0 || en.cut >= ch.n_sites) {
    throw ConfigError("ensemble.cut", fmt::format("must be in [0, {}), got {}", ch.n_sites, en.cut));
  }
  if (en.log_base != 0.0 && (!(en.log_base > 0.0) || en.log_base == 1.0)) {
    throw ConfigError("ensemble.log_base", fmt::format("must be e or a positive number other than 1, got {}", en.log_base));
  }

  int q = 0;
  try {
    const auto wall_exc = cfg.init.preset == "domain_wall" ? ch.n_exc : std::nullopt;
    q = static_cast<int>(preset_sites(cfg.init.preset, ch.n_sites, wall_exc, cfg.init.sites).size());
  } catch (const ParameterError& e) {
    throw ConfigError(cfg.init.preset == "explicit_sites" ? "init.sites" : "init.preset", e.what());
  }
  if (ch.n_exc && *ch.n_exc != q) {
    throw ConfigError("chain.n_exc", fmt::format("{} does not match the {} excitations of the initial state", *ch.n_exc, q));
  }
  const double dim = static_cast<double>(binomial(ch.n_sites, q));
  if (dim > static_cast<double>(kDefaultDenseCap)) {
    throw ConfigError("chain.n_sites",
                      fmt::format("sector dimension {} exceeds the dense cap {}", dim, kDefaultDenseCap));
  }

  const auto& an = cfg.analysis;
  if (an.observable == SeriesObservable::Ipr && q != 1) {
    throw ConfigError("analysis.observable", fmt::format("ipr needs one excitation, the initial state has {}", q));
  }
  if (an.plateau.window < 1) throw ConfigError("analysis.window", "must be >= 1");
  if (!(an.plateau.slope >= 0.0)) throw ConfigError("analysis.slope", "must be >= 0");
  if (!(an.plateau.d_min >= 0.0)) throw ConfigError("analysis.dmin", "must be >= 0");
  if (!(an.plateau.min_jump >= 0.0)) throw ConfigError("analysis.min_jump", "must be >= 0");
  if (!(an.plateau.contrast >= 0.0)) throw ConfigError("analysis.contrast", "must be >= 0");
  if (!(an.plateau.max_trend >= 0.0 && an.plateau.max_trend <= 1.0)) {
    throw ConfigError("analysis.max_trend", "must lie in [0, 1]");
  }
  if (!(an.tau_factor > 0.0)) throw ConfigError("analysis.tau_factor", "must be > 0");
  if (static_cast<double>(en.t_final / en.dt) + 1.0 < an.plateau.window) {
    throw ConfigError("analysis.window", "longer than the output grid");
  }

  if (!(cfg.output.histogram_bin >= 0.0)) throw ConfigError("output.histogram_bin", "must be >= 0");
  static const std::set<std::string> known{"ipr", "ier", "imb", "svn", "density"};
  for (const auto& o : cfg.output.observables) {
    if (!known.contains(o)) {
      throw ConfigError("output.observables", fmt::format("unknown observable '{}' (ipr, ier, imb, svn, density)", o));
    }
  }
}

std::string to_flat(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) {
    const auto v = f.get(cfg);
    if (!f.mandatory && !f.list && v.empty()) continue;
    out += fmt::format("{} = {}\n", f.key, v);
  }
  return out;
}

std::vector<GridAxis> parse_grid(std::string_view text) {
  std::vector<GridAxis> axes;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("grid line {}", line_no), "expected 'key = v1, v2, ...'");
    }
    GridAxis axis{std::string(trim(line.substr(0, eq))), split_list(line.substr(eq + 1))};
    if (find_field(axis.key) == nullptr) throw ConfigError(axis.key, "unknown key in grid");
    if (is_list_key(axis.key)) throw ConfigError(axis.key, "list-valued keys cannot be swept");
    if (axis.values.empty()) throw ConfigError(axis.key, "grid axis has no values");
    if (!seen.insert(axis.key).second) throw ConfigError(axis.key, "duplicate grid axis");
    axes.push_back(std::move(axis));
  }
  return axes;
}

std::vector<std::vector<std::pair<std::string, std::string>>> grid_points(const std::vector<GridAxis>& axes) {
  std::vector<std::vector<std::pair<std::string, std::string>>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    next.reserve(points.size() * axis.values.size());
    for (const auto& p : points) {
      for (const auto& v : axis.values) {
        auto q = p;
        q.emplace_back(axis.key, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

ChainSpec chain_spec(const ExperimentConfig& cfg) {
  ChainSpec spec = ChainSpec::with_disorder(cfg.chain.n_sites, cfg.chain.J, cfg.chain.delta, cfg.chain.h,
                                            cfg.chain.disorder_seed);
  if (!cfg.chain.fields.empty()) spec.fields = cfg.chain.fields;
  spec.validate();
  return spec;
}

NoiseSpec noise_spec(const ExperimentConfig& cfg) {
  std::vector<int> sites;
  for (int s : cfg.noise.sites) sites.push_back(s - 1);
  return NoiseSpec::make(cfg.noise.nu, cfg.noise.rc, cfg.noise.seed, std::move(sites));
}

EnsembleSpec ensemble_spec(const ExperimentConfig& cfg) {
  EnsembleSpec e;
  e.n_traj = cfg.ensemble.n_traj;
  e.dt = cfg.ensemble.dt;
  e.t_final = cfg.ensemble.t_final;
  e.entropy_mode = cfg.ensemble.entropy_mode;
  if (cfg.ensemble.cut > 0) e.cut = cfg.ensemble.cut;
  e.log_base = cfg.ensemble.log_base;
  e.chunk_statistics = cfg.ensemble.error_bars;
  e.record_events = cfg.output.histogram_bin > 0.0;
  e.validate();
  return e;
}

}  // namespace xxzcoll
