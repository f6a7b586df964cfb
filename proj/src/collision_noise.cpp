#include "xxzcoll/collision_noise.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "xxzcoll/errors.hpp"

namespace xxzcoll {

NoiseSpec NoiseSpec::make(double nu, double rc, std::uint64_t seed, std::vector<int> active_sites) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw ParameterError(fmt::format("shape nu = {} must be finite and >= 0", nu));
  }
  if (!(rc >= 0.0) || !std::isfinite(rc)) {
    throw ParameterError(fmt::format("collision rate rc = {} must be finite and >= 0", rc));
  }
  for (int site : active_sites) {
    if (site < 0) throw ParameterError(fmt::format("collision site {} is negative", site));
  }
  NoiseSpec spec;
  spec.nu = nu;
  spec.rc = rc;
  spec.seed = seed;
  std::sort(active_sites.begin(), active_sites.end());
  active_sites.erase(std::unique(active_sites.begin(), active_sites.end()), active_sites.end());
  spec.active_sites = std::move(active_sites);
  if (!spec.closed() && !std::isfinite(spec.mu())) {
    throw ParameterError(fmt::format("Gamma(1 + 1/nu) overflows for nu = {}", nu));
  }
  return spec;
}

double NoiseSpec::mu() const {
  if (closed()) return 0.0;
  return 1.0 / (rc * std::tgamma(1.0 + 1.0 / nu));
}

bool NoiseSpec::is_active(int site) const {
  return active_sites.empty() || std::binary_search(active_sites.begin(), active_sites.end(), site);
}

double weibull_inverse_cdf(double u, double nu, double mu) {
  return mu * std::pow(-std::log1p(-u), 1.0 / nu);
}

double sample_waiting_time(CounterRng& stream, const NoiseSpec& spec) {
  if (spec.closed()) throw ParameterError("sample_waiting_time on a closed system (rc = 0 or nu = 0)");
  return weibull_inverse_cdf(stream.uniform(), spec.nu, spec.mu());
}

std::optional<CollisionEvent> CollisionSchedule::peek() const {
  std::optional<CollisionEvent> best;
  for (std::size_t i = 0; i < next_time_.size(); ++i) {
    const double t = next_time_[i];
    if (t == kNever) continue;
    if (!best || t < best->time) best = CollisionEvent{static_cast<int>(i), t};
  }
  return best;
}

CollisionSchedule init_schedule(int n_sites, const NoiseSpec& spec, std::uint64_t trajectory_index) {
  std::vector<double> next(static_cast<std::size_t>(n_sites), kNever);
  std::vector<CounterRng> streams;
  streams.reserve(next.size());
  for (int i = 0; i < n_sites; ++i) {
    streams.emplace_back(derive_key(spec.seed, static_cast<std::uint64_t>(StreamPurpose::Collision),
                                    trajectory_index, static_cast<std::uint64_t>(i)));
  }
  if (!spec.closed()) {
    for (int i = 0; i < n_sites; ++i) {
      if (spec.is_active(i)) next[i] = sample_waiting_time(streams[i], spec);
    }
  }
  return CollisionSchedule(std::move(next), std::move(streams));
}

std::optional<CollisionEvent> pop_next_event(CollisionSchedule& schedule, const NoiseSpec& spec) {
  auto ev = schedule.peek();
  if (!ev) return std::nullopt;
  const auto s = static_cast<std::size_t>(ev->site);
  schedule.next_time_[s] += sample_waiting_time(schedule.streams_[s], spec);
  return ev;
}

CollisionHistogram collision_histogram(std::span<const CollisionEvent> events, int n_sites,
                                       double bin_width, double horizon) {
  if (!(bin_width > 0.0)) throw ParameterError("histogram bin width must be > 0");
  if (!(horizon >= 0.0)) throw ParameterError("histogram horizon must be >= 0");
  CollisionHistogram hist;
  hist.n_sites = n_sites;
  hist.bin_width = bin_width;
  hist.n_bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / bin_width)));
  hist.counts.assign(static_cast<std::size_t>(n_sites) * hist.n_bins, 0);
  for (const auto& ev : events) {
    if (ev.site < 0 || ev.site >= n_sites) {
      throw ParameterError(fmt::format("event site {} outside chain of {} sites", ev.site, n_sites));
    }
    if (ev.time < 0.0 || ev.time > horizon) continue;
    const auto bin = std::min(hist.n_bins - 1, static_cast<std::size_t>(ev.time / bin_width));
    ++hist.counts[static_cast<std::size_t>(ev.site) * hist.n_bins + bin];
  }
  return hist;
}

}  // namespace xxzcoll
