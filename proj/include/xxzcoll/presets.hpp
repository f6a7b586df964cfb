#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xxzcoll/sector_basis.hpp"

namespace xxzcoll {

// Initial-state presets. Placement (1-based sites):
//   single_center   site ceil(N/2)
//   two_separated   c and c+3 with c = floor((N-4)/2) + 1, two empty sites between
//   two_adjacent    c and c+1 with c = floor((N-2)/2) + 1
//   domain_wall     sites 1..n_exc (n_exc required)
//   explicit_sites  the given 1-based sites
std::vector<std::string> initial_state_presets();

// Occupied sites, 0-based and ascending. Throws ParameterError.
std::vector<int> preset_sites(std::string_view preset, int n_sites, std::optional<int> n_exc,
                              std::span<const int> explicit_sites = {});

Pattern sites_pattern(std::span<const int> sites);

// Unit-norm basis state with the given 0-based sites occupied.
Eigen::VectorXcd basis_state(const SectorBasis& basis, std::span<const int> sites);

/// A named, parameter-complete experiment matching one figure panel.
struct FigurePreset {
  std::string name;
  std::string description;
  std::string config;      // flat config text, paper scale
  std::string grid;        // sweep grid, paper scale; empty for a single run
  std::string desk_grid;   // reduced grid; empty means the paper grid
  std::size_t desk_traj = 100;
  std::string runtime;     // rough single-core wall time, paper and desk

  // Config and grid text for the chosen scale.
  std::string config_text(bool desk) const;
  std::string grid_text(bool desk) const;
};

const std::vector<FigurePreset>& preset_catalog();
const FigurePreset& find_preset(std::string_view name);  // throws ParameterError

}  // namespace xxzcoll
