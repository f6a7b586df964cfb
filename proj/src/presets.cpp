#include "xxzcoll/presets.hpp"

#include <algorithm>
#include <fmt/format.h>

#include "xxzcoll/errors.hpp"

namespace xxzcoll {

std::vector<std::string> initial_state_presets() {
  return {"single_center", "two_separated", "two_adjacent", "domain_wall", "explicit_sites"};
}

namespace {

std::vector<int> place(std::string_view preset, int n_sites, std::optional<int> n_exc,
                       std::span<const int> explicit_sites) {
  if (n_sites < 1 || n_sites > kMaxSites) throw ParameterError(fmt::format("n_sites = {} out of range", n_sites));
  if (preset == "single_center") {
    return {(n_sites + 1) / 2 - 1};
  }
  if (preset == "two_separated") {
    if (n_sites < 4) throw ParameterError("two_separated needs at least 4 sites");
    const int c = (n_sites - 4) / 2;
    return {c, c + 3};
  }
  if (preset == "two_adjacent") {
    if (n_sites < 2) throw ParameterError("two_adjacent needs at least 2 sites");
    const int c = (n_sites - 2) / 2;
    return {c, c + 1};
  }
  if (preset == "domain_wall") {
    if (!n_exc) throw ParameterError("domain_wall needs chain.n_exc");
    if (*n_exc < 0 || *n_exc > n_sites) {
      throw ParameterError(fmt::format("domain_wall with {} excitations on {} sites", *n_exc, n_sites));
    }
    std::vector<int> s(static_cast<std::size_t>(*n_exc));
    for (int i = 0; i < *n_exc; ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
  }
  if (preset == "explicit_sites") {
    std::vector<int> s;
    for (int site : explicit_sites) {
      if (site < 1 || site > n_sites) throw ParameterError(fmt::format("site {} outside 1..{}", site, n_sites));
      s.push_back(site - 1);
    }
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw ParameterError("repeated site in explicit_sites");
    return s;
  }
  throw ParameterError(fmt::format("unknown initial-state preset '{}' (known: {})", preset,
                                   fmt::join(initial_state_presets(), ", ")));
}

}  // namespace

std::vector<int> preset_sites(std::string_view preset, int n_sites, std::optional<int> n_exc,
                              std::span<const int> explicit_sites) {
  auto sites = place(preset, n_sites, n_exc, explicit_sites);
  if (n_exc && static_cast<int>(sites.size()) != *n_exc) {
    throw ParameterError(fmt::format("{} places {} excitations, sector has {}", preset, sites.size(), *n_exc));
  }
  return sites;
}

Pattern sites_pattern(std::span<const int> sites) {
  Pattern p = 0;
  for (int s : sites) {
    if (s < 0 || s >= kMaxSites) throw ParameterError(fmt::format("site {} out of range", s));
    p |= Pattern{1} << s;
  }
  return p;
}

Eigen::VectorXcd basis_state(const SectorBasis& basis, std::span<const int> sites) {
  for (int s : sites) {
    if (s >= basis.n_sites()) throw ParameterError(fmt::format("site {} outside chain of {}", s, basis.n_sites()));
  }
  const Pattern p = sites_pattern(sites);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dim()));
  psi(static_cast<Eigen::Index>(basis.rank(p))) = 1.0;
  return psi;
}

std::string FigurePreset::config_text(bool desk) const {
  if (!desk) return config;
  std::string out;
  std::size_t pos = 0;
  while (pos < config.size()) {
    auto end = config.find('\n', pos);
    if (end == std::string::npos) end = config.size();
    const std::string line = config.substr(pos, end - pos);
    out += line.starts_with("ensemble.n_traj") ? fmt::format("ensemble.n_traj = {}", desk_traj) : line;
    out += '\n';
    pos = end + 1;
  }
  return out;
}

std::string FigurePreset::grid_text(bool desk) const { return desk && !desk_grid.empty() ? desk_grid : grid; }

namespace {

// Shared blocks. n_traj is appended last so the desk variant can override it.
const char* const kSingle41 =
    "chain.n_sites = 41\n"
    "chain.delta = 0\n"
    "chain.disorder_seed = 1\n"
    "init.preset = single_center\n"
    "noise.nu = 100\n"
    "noise.seed = 1\n"
    "ensemble.dt = 0.02\n"
    "ensemble.t_final = 30\n";

const char* const kTwo20 =
    "chain.n_sites = 20\n"
    "chain.delta = 2.5\n"
    "chain.disorder_seed = 1\n"
    "noise.nu = 100\n"
    "noise.seed = 1\n"
    "ensemble.dt = 0.02\n"
    "ensemble.t_final = 30\n";

std::string single41(const std::string& extra, int M) {
  return std::string(kSingle41) + extra + fmt::format("ensemble.n_traj = {}\n", M);
}

std::string two20(const std::string& preset, const std::string& extra, int M) {
  return std::string(kTwo20) + "init.preset = " + preset + "\n" + extra + fmt::format("ensemble.n_traj = {}\n", M);
}

std::vector<FigurePreset> build_catalog() {
  std::vector<FigurePreset> c;
  c.push_back({"fig1b", "collision histogram, nu = 100, rc = 1, N = 41",
               single41("chain.h = 10\nnoise.rc = 1\noutput.histogram_bin = 0.1\n", 500), "", "", 100,
               "paper ~10 s, desk ~3 s"});
  c.push_back({"fig1c", "collision histogram, nu = 100, rc = 0.1, N = 41",
               single41("chain.h = 10\nnoise.rc = 0.1\noutput.histogram_bin = 0.1\n", 500), "", "", 100,
               "paper ~5 s, desk ~1 s"});
  c.push_back({"fig2a", "IPR at t = 30 over a (nu, rc) grid, h = 10, N = 41",
               single41("chain.h = 10\nnoise.rc = 1\n", 500),
               "noise.nu = 0.5, 1, 5, 10, 50, 100\nnoise.rc = 0.1, 0.5, 1, 5, 10, 50, 100\n",
               "noise.nu = 1, 100\nnoise.rc = 0.1, 1, 10\n", 100, "paper ~1 h, desk ~1 min"});
  c.push_back({"fig2b", "IPR vs time for several rc, h = 10, nu = 100, N = 41",
               single41("chain.h = 10\nnoise.rc = 0\n", 500), "noise.rc = 0, 0.1, 0.5, 1, 5, 50, 100\n",
               "noise.rc = 0, 0.1, 1, 5, 50\n", 100, "paper ~10 min, desk ~1 min"});
  c.push_back({"fig2c", "IPR vs time for several h, rc = 0.1, nu = 100, N = 41",
               single41("chain.h = 10\nnoise.rc = 0.1\n", 500), "chain.h = 0.1, 0.5, 1, 5, 10\n", "", 100,
               "paper ~20 s, desk ~5 s"});
  c.push_back({"fig3a", "IER vs time for several rc, two separated excitations, N = 20",
               two20("two_separated", "chain.h = 10\nnoise.rc = 0.1\n", 250),
               "noise.rc = 0, 0.1, 0.2, 0.5, 1, 2, 5, 10\n", "noise.rc = 0, 0.1, 0.5, 1, 5\n", 100,
               "paper ~15 min, desk ~3 min"});
  c.push_back({"fig3b", "IER vs t*rc collapse, rc in [0.2, 1], two separated excitations",
               two20("two_separated", "chain.h = 10\nnoise.rc = 0.2\n", 250),
               "noise.rc = 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 1\n",
               "noise.rc = 0.2, 0.5, 1\n", 100, "paper ~5 min, desk ~30 s"});
  c.push_back({"fig4", "plateau duration and area over (h, rc, nu, delta)",
               two20("two_separated", "chain.h = 10\nnoise.rc = 0.1\n", 250),
               "chain.h = 0.5, 1, 5, 10\nnoise.rc = 0.1, 0.2, 0.5, 0.7, 0.9, 1\nnoise.nu = 50, 100\n"
               "chain.delta = 0, 2.5\n",
               "chain.h = 0.5, 10\nnoise.rc = 0.1, 0.2, 0.5, 1\n", 100, "paper ~30 min, desk ~2 min"});
  c.push_back({"fig5", "complete delocalization time over (h, rc, nu)",
               two20("two_separated", "chain.h = 10\nnoise.rc = 0.1\n", 250),
               "chain.h = 0.5, 1, 5, 10\nnoise.rc = 0.1, 0.5, 1, 2, 5, 8, 10\nnoise.nu = 50, 100\n",
               "chain.h = 0.5, 10\nnoise.rc = 0.5, 2, 8\n", 100, "paper ~3 h, desk ~10 min"});
  c.push_back({"fig6", "domain wall, N = 8, q = 4, t_final = 1000",
               "chain.n_sites = 8\nchain.n_exc = 4\nchain.delta = 2.5\nchain.h = 10\nchain.disorder_seed = 1\n"
               "init.preset = domain_wall\nnoise.nu = 100\nnoise.rc = 0.1\nnoise.seed = 1\n"
               "ensemble.dt = 0.02\nensemble.t_final = 1000\nensemble.n_traj = 250\n",
               "noise.rc = 0.05, 0.1, 0.5, 1\n", "noise.rc = 0.1, 1\n", 100, "paper ~30 min, desk ~5 min"});
  c.push_back({"fig7", "entanglement entropy, two adjacent excitations, cut after site 10",
               two20("two_adjacent", "chain.h = 10\nnoise.rc = 0.1\nensemble.cut = 10\n", 250),
               "noise.nu = 0, 0.5, 1, 100\n", "", 100, "paper ~5 min, desk ~2 min"});
  c.push_back({"figA1a", "imbalance for several rc, h = 10, N = 41",
               single41("chain.h = 10\nnoise.rc = 0\n", 500), "noise.rc = 0, 0.1, 0.5, 1, 5, 50, 100\n",
               "noise.rc = 0, 0.1, 1, 5, 50\n", 100, "paper ~10 min, desk ~1 min"});
  c.push_back({"figA1b", "imbalance for several h, rc = 0.1, N = 41",
               single41("chain.h = 10\nnoise.rc = 0.1\n", 500), "chain.h = 0.1, 0.5, 1, 5, 10\n", "", 100,
               "paper ~20 s, desk ~5 s"});
  c.push_back({"figA2a", "IER for several h, two separated excitations",
               two20("two_separated", "chain.h = 10\nnoise.rc = 0.1\n", 250), "chain.h = 0.1, 0.5, 1, 5, 10\n", "",
               100, "paper ~1 min, desk ~30 s"});
  c.push_back({"figA2b", "IER for several h, two adjacent excitations",
               two20("two_adjacent", "chain.h = 10\nnoise.rc = 0.1\n", 250), "chain.h = 0.1, 0.5, 1, 5, 10\n", "",
               100, "paper ~1 min, desk ~30 s"});
  return c;
}

}  // namespace

const std::vector<FigurePreset>& preset_catalog() {
  static const std::vector<FigurePreset> catalog = build_catalog();
  return catalog;
}

const FigurePreset& find_preset(std::string_view name) {
  for (const auto& p : preset_catalog()) {
    if (p.name == name) return p;
  }
  std::vector<std::string> names;
  for (const auto& p : preset_catalog()) names.push_back(p.name);
  throw ParameterError(fmt::format("unknown preset '{}' (known: {})", name, fmt::join(names, ", ")));
}

}  // namespace xxzcoll
