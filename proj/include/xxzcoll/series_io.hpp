#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xxzcoll/collision_noise.hpp"
#include "xxzcoll/observables.hpp"

namespace xxzcoll {

// Thrown for unreadable or unwritable files; the message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// Series CSV: t, ipr, ier, imb, svn, n_1 ... n_N. Observables that are
// undefined for the run or not in `selected` are written as empty fields.
// Numbers use the shortest representation that round-trips.
std::string series_csv(const ObservableSeries& s, const std::set<std::string>& selected);

// Jackknife errors: t, ipr_se, ier_se, svn_se (empty when unavailable).
std::string stderr_csv(const ObservableSeries& s);

// index, eigenvalue
std::string eigenvalues_csv(const Eigen::VectorXd& eigenvalues);

// site (1-based), bin_start, count; every (site, bin) pair is listed.
std::string histogram_csv(const CollisionHistogram& h);

/// Parsed series CSV. Empty fields become std::nullopt.
struct SeriesTable {
  std::vector<std::string> header;
  std::map<std::string, std::vector<std::optional<double>>> columns;
  std::size_t rows = 0;

  bool has(const std::string& name) const;
  // Values of a column that must be complete; throws IoError otherwise.
  std::vector<double> dense(const std::string& name) const;
  // Number of n_i columns.
  int n_sites() const;
};

SeriesTable parse_series_csv(const std::string& text, const std::string& origin = "<memory>");
SeriesTable read_series_csv(const std::string& path);

}  // namespace xxzcoll
