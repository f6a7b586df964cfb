#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "xxzcoll/rng.hpp"

namespace xxzcoll {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// Weibull renewal noise. Waiting times t have density
///   p(t) = (nu/mu) (t/mu)^(nu-1) exp(-(t/mu)^nu),
/// with the scale fixed by the mean: mu * Gamma(1 + 1/nu) = 1 / rc.
/// rc == 0 or nu == 0 means no collisions at all.
struct NoiseSpec {
  double nu = 1.0;
  double rc = 0.0;
  std::uint64_t seed = 1;
  // Sites (0-based) that receive collisions; empty means every site.
  std::vector<int> active_sites;

  // Validating factory; throws ParameterError for negative or non-finite input.
  static NoiseSpec make(double nu, double rc, std::uint64_t seed, std::vector<int> active_sites = {});

  bool closed() const noexcept { return rc == 0.0 || nu == 0.0; }
  // 1 / (rc Gamma(1 + 1/nu)); 0 for a closed system.
  double mu() const;
  bool is_active(int site) const;
};

// t = mu (-ln(1 - u))^(1/nu), the inverse of the Weibull CDF.
double weibull_inverse_cdf(double u, double nu, double mu);

// Draws one waiting time from `stream`. Requires an open system.
double sample_waiting_time(CounterRng& stream, const NoiseSpec& spec);

struct CollisionEvent {
  int site = 0;
  double time = 0.0;
  friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
};

/// Absolute next-collision times per site, one independent stream per
/// (seed, trajectory, site). Entries are kNever for sites that never collide.
class CollisionSchedule {
 public:
  CollisionSchedule() = default;
  CollisionSchedule(std::vector<double> next_time, std::vector<CounterRng> streams)
      : next_time_(std::move(next_time)), streams_(std::move(streams)) {}

  std::span<const double> next_times() const noexcept { return next_time_; }
  std::optional<CollisionEvent> peek() const;  // earliest event, lowest site on ties
  int n_sites() const noexcept { return static_cast<int>(next_time_.size()); }
  std::uint64_t draws(int site) const { return streams_.at(static_cast<std::size_t>(site)).draws(); }

 private:
  friend std::optional<CollisionEvent> pop_next_event(CollisionSchedule&, const NoiseSpec&);
  std::vector<double> next_time_;
  std::vector<CounterRng> streams_;
};

CollisionSchedule init_schedule(int n_sites, const NoiseSpec& spec, std::uint64_t trajectory_index);

// Returns the earliest event and advances that site by a fresh waiting time.
// std::nullopt when no finite event remains.
std::optional<CollisionEvent> pop_next_event(CollisionSchedule& schedule, const NoiseSpec& spec);

/// Collision counts per (site, time bin); bin b covers [b*width, (b+1)*width).
struct CollisionHistogram {
  int n_sites = 0;
  double bin_width = 0.0;
  std::size_t n_bins = 0;
  std::vector<std::uint64_t> counts;  // site-major: counts[site * n_bins + bin]

  std::uint64_t at(int site, std::size_t bin) const {
    return counts[static_cast<std::size_t>(site) * n_bins + bin];
  }
};

// Events past `horizon` are dropped.
CollisionHistogram collision_histogram(std::span<const CollisionEvent> events, int n_sites,
                                       double bin_width, double horizon);

}  // namespace xxzcoll
