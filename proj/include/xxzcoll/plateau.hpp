#pragma once

#include <span>
#include <vector>

namespace xxzcoll {

// Plateau detection by level segmentation.
//
// The series is smoothed with a centred moving average of `window` samples and
// split recursively at the point of largest mean shift. A split is kept when
// both parts last at least `d_min`, the shift is at least `min_jump` times the
// series range, and the shift is at least `contrast` times the pooled standard
// deviation of the two parts. A resulting segment is a plateau when it lasts at
// least `d_min` and is flat: its least-squares line either explains at most
// `max_trend` of the segment variance or has |slope| <= `slope` * range per
// unit time.
struct PlateauConfig {
  int window = 25;         // moving-average width, samples
  double slope = 0.002;    // per unit time, fraction of the series range
  double d_min = 1.0;      // minimum duration, units of 1/J
  double min_jump = 0.03;  // fraction of the series range
  double contrast = 1.0;   // shift / pooled standard deviation
  double max_trend = 0.5;  // max R^2 of a linear fit inside a plateau
};

struct Plateau {
  double t_start = 0.0;
  double t_end = 0.0;
  double height = 0.0;  // mean of the raw values over [t_start, t_end]
  double jump = 0.0;    // height minus the mean of the following segment; 0 for the last
  double duration() const noexcept { return t_end - t_start; }
};

/// Time-ordered, non-overlapping plateaus of a uniformly gridded series.
/// Throws ParameterError when the series is shorter than the window.
std::vector<Plateau> detect_plateaus(std::span<const double> times, std::span<const double> values,
                                     const PlateauConfig& config = {});

struct PlateauMetrics {
  double D = 0.0;           // duration of the first plateau
  double Z_J = 0.0;         // drop at the end of the first plateau, clamped to [0, 1]
  double height = 0.0;      // level of the first plateau
  double area = 0.0;        // Z_J * D * rc
  double P_h = 0.0;         // h * rc
  double P_h_scaled = 0.0;  // h * rc * nu
};

PlateauMetrics first_plateau_metrics(std::span<const Plateau> plateaus, double rc, double h, double nu);

/// Complete delocalization time: the first grid time at which the series is
/// below `factor / dim` and no plateau higher than twice that threshold starts
/// later. `beyond_horizon` is set (and `time` holds the horizon) when no such
/// time exists.
struct DelocalizationTime {
  double time = 0.0;
  bool beyond_horizon = false;
};

DelocalizationTime delocalization_time(std::span<const double> times, std::span<const double> values,
                                       std::size_t dim, double horizon, std::span<const Plateau> plateaus = {},
                                       double factor = 10.0);

// Rescales the abscissa to t * rc; throws ParameterError for rc <= 0.
std::vector<double> collapse_transform(std::span<const double> times, double rc);

struct PlateauReport {
  std::vector<Plateau> plateaus;
  PlateauMetrics metrics;
  DelocalizationTime tau;
};

PlateauReport analyze_series(std::span<const double> times, std::span<const double> values, std::size_t dim,
                             double rc, double h, double nu, const PlateauConfig& config = {},
                             double tau_factor = 10.0);

}  // namespace xxzcoll
