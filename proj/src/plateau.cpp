#include "xxzcoll/plateau.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <vector>

#include "xxzcoll/errors.hpp"

namespace xxzcoll {
namespace {

// Centred moving average; the window is truncated at both ends of the series.
std::vector<double> moving_average(std::span<const double> v, int window) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  const std::ptrdiff_t half = window / 2;
  std::vector<double> out(v.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    double s = 0.0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) s += v[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

struct Segment {
  std::size_t begin;  // inclusive
  std::size_t end;    // exclusive
};

// Recursive mean-shift segmentation of `smooth`, returned in time order.
std::vector<Segment> segment_levels(std::span<const double> smooth, std::size_t min_len, double min_shift,
                                    double contrast) {
  const std::size_t n = smooth.size();
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + smooth[i];
    s2[i + 1] = s2[i] + smooth[i] * smooth[i];
  }
  const auto mean = [&](std::size_t a, std::size_t b) { return (s1[b] - s1[a]) / static_cast<double>(b - a); };
  const auto sum_sq_dev = [&](std::size_t a, std::size_t b) {
    const double m = mean(a, b);
    return std::max(0.0, (s2[b] - s2[a]) - static_cast<double>(b - a) * m * m);
  };

  std::vector<Segment> out;
  std::vector<Segment> stack{{0, n}};
  while (!stack.empty()) {
    const Segment seg = stack.back();
    stack.pop_back();
    const std::size_t len = seg.end - seg.begin;
    std::size_t best_k = 0;
    double best_gain = -1.0;
    if (len >= 2 * min_len) {
      for (std::size_t k = seg.begin + min_len; k + min_len <= seg.end; ++k) {
        const auto nl = static_cast<double>(k - seg.begin);
        const auto nr = static_cast<double>(seg.end - k);
        const double d = mean(seg.begin, k) - mean(k, seg.end);
        const double gain = nl * nr / static_cast<double>(len) * d * d;
        if (gain > best_gain) {
          best_gain = gain;
          best_k = k;
        }
      }
    }
    bool split = false;
    if (best_gain >= 0.0) {
      const double shift = std::abs(mean(seg.begin, best_k) - mean(best_k, seg.end));
      const double pooled =
          std::sqrt((sum_sq_dev(seg.begin, best_k) + sum_sq_dev(best_k, seg.end)) / static_cast<double>(len));
      split = shift >= min_shift && shift >= contrast * pooled;
    }
    if (split) {
      // Right half first so the left half is processed next.
      stack.push_back({best_k, seg.end});
      stack.push_back({seg.begin, best_k});
    } else {
      out.push_back(seg);
    }
  }
  return out;
}

struct LineFit {
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(std::span<const double> t, std::span<const double> v) {
  const auto n = static_cast<double>(t.size());
  if (t.size() < 2) return {};
  double mt = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    mv += v[i];
  }
  mt /= n;
  mv /= n;
  double stt = 0.0, stv = 0.0, svv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    stv += (t[i] - mt) * (v[i] - mv);
    svv += (v[i] - mv) * (v[i] - mv);
  }
  LineFit f;
  f.slope = stt > 0.0 ? stv / stt : 0.0;
  f.r2 = (stt > 0.0 && svv > 0.0) ? (stv * stv) / (stt * svv) : 0.0;
  return f;
}

}  // namespace

std::vector<Plateau> detect_plateaus(std::span<const double> times, std::span<const double> values,
                                     const PlateauConfig& config) {
  if (times.size() != values.size()) {
    throw ParameterError(fmt::format("{} times for {} values", times.size(), values.size()));
  }
  if (config.window < 1) throw ParameterError("plateau window must be >= 1 sample");
  if (values.size() < static_cast<std::size_t>(config.window) || values.size() < 2) {
    throw ParameterError(
        fmt::format("series of {} samples is shorter than the window of {}", values.size(), config.window));
  }
  if (!(config.slope >= 0.0) || !(config.d_min >= 0.0) || !(config.min_jump >= 0.0) || !(config.contrast >= 0.0) ||
      !(config.max_trend >= 0.0)) {
    throw ParameterError("plateau thresholds must be >= 0");
  }
  const std::size_t n = values.size();
  const double dt = (times[n - 1] - times[0]) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw ParameterError("plateau detection needs increasing times");

  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  const auto smooth = moving_average(values, config.window);
  const auto min_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(config.d_min / dt)));
  const auto segments = segment_levels(smooth, min_len, config.min_jump * range + 1e-12, config.contrast);

  std::vector<double> means;
  for (const auto& s : segments) {
    double sum = 0.0;
    for (std::size_t k = s.begin; k < s.end; ++k) sum += values[k];
    means.push_back(sum / static_cast<double>(s.end - s.begin));
  }

  std::vector<Plateau> out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const double t0 = times[s.begin];
    const double t1 = times[s.end - 1];
    if (s.end - s.begin < 2 || t1 - t0 + 1e-9 < config.d_min) continue;
    const auto fit = fit_line(times.subspan(s.begin, s.end - s.begin), values.subspan(s.begin, s.end - s.begin));
    const bool flat = fit.r2 <= config.max_trend || std::abs(fit.slope) <= config.slope * range + 1e-12;
    if (!flat) continue;
    const double jump = (i + 1 < segments.size()) ? means[i] - means[i + 1] : 0.0;
    out.push_back(Plateau{t0, t1, means[i], jump});
  }
  return out;
}

PlateauMetrics first_plateau_metrics(std::span<const Plateau> plateaus, double rc, double h, double nu) {
  PlateauMetrics m;
  m.P_h = h * rc;
  m.P_h_scaled = h * rc * nu;
  if (!plateaus.empty()) {
    const Plateau& first = plateaus.front();
    m.D = first.duration();
    m.height = first.height;
    m.Z_J = std::clamp(first.jump, 0.0, 1.0);
    m.area = m.Z_J * m.D * rc;
  }
  return m;
}

DelocalizationTime delocalization_time(std::span<const double> times, std::span<const double> values,
                                       std::size_t dim, double horizon, std::span<const Plateau> plateaus,
                                       double factor) {
  if (times.size() != values.size()) throw ParameterError("times and values differ in length");
  if (dim == 0) throw ParameterError("sector dimension must be >= 1");
  const double threshold = factor / static_cast<double>(dim);
  // Candidates must not be followed by the start of a plateau above 2 * threshold.
  double latest_high_start = -std::numeric_limits<double>::infinity();
  for (const auto& p : plateaus) {
    if (p.height > 2.0 * threshold) latest_high_start = std::max(latest_high_start, p.t_start);
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] > horizon) break;
    if (values[k] < threshold && times[k] >= latest_high_start) return {times[k], false};
  }
  return {horizon, true};
}

std::vector<double> collapse_transform(std::span<const double> times, double rc) {
  if (!(rc > 0.0)) throw ParameterError(fmt::format("collapse needs rc > 0, got {}", rc));
  std::vector<double> out(times.begin(), times.end());
  for (auto& t : out) t *= rc;
  return out;
}

PlateauReport analyze_series(std::span<const double> times, std::span<const double> values, std::size_t dim,
                             double rc, double h, double nu, const PlateauConfig& config, double tau_factor) {
  PlateauReport r;
  r.plateaus = detect_plateaus(times, values, config);
  r.metrics = first_plateau_metrics(r.plateaus, rc, h, nu);
  const double horizon = times.empty() ? 0.0 : times.back();
  r.tau = delocalization_time(times, values, dim, horizon, r.plateaus, tau_factor);
  return r;
}

}  // namespace xxzcoll
