#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracle.hpp"
#include "xxzcoll/collision_noise.hpp"
#include "xxzcoll/errors.hpp"
#include "xxzcoll/rng.hpp"

using namespace xxzcoll;

TEST_CASE("inverse CDF matches the closed-form CDF") {
  for (double nu : {0.3, 1.0, 5.0, 100.0}) {
    for (double rc : {0.1, 1.0, 50.0}) {
      const auto spec = NoiseSpec::make(nu, rc, 1);
      for (double u : {1e-9, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
        const double t = weibull_inverse_cdf(u, nu, spec.mu());
        CHECK(oracle::weibull_cdf(t, nu, rc) == doctest::Approx(u).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("scale is fixed by the mean collision time") {
  CHECK(NoiseSpec::make(1.0, 0.5, 1).mu() == doctest::Approx(2.0));
  CHECK(NoiseSpec::make(2.0, 1.0, 1).mu() == doctest::Approx(2.0 / std::sqrt(M_PI)));
  CHECK(NoiseSpec::make(1.0, 0.0, 1).mu() == 0.0);
  CHECK(NoiseSpec::make(0.0, 1.0, 1).closed());
}

TEST_CASE("sampled waiting times pass KS and have mean 1/rc") {
  for (double nu : {1.0, 5.0, 100.0}) {
    const double rc = 0.7;
    const auto spec = NoiseSpec::make(nu, rc, 3);
    CounterRng rng(derive_key(3, 99, static_cast<std::uint64_t>(nu)));
    std::vector<double> x(100000);
    for (auto& v : x) v = sample_waiting_time(rng, spec);
    const double d = oracle::ks_statistic(x, [&](double t) { return oracle::weibull_cdf(t, nu, rc); });
    CHECK(oracle::ks_pvalue(d, x.size()) > 1e-3);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    CHECK(std::abs(mean * rc - 1.0) < 0.005);
  }
}

TEST_CASE("KS oracle detects a wrong distribution") {
  const auto spec = NoiseSpec::make(1.0, 1.0, 3);
  CounterRng rng(derive_key(3, 5));
  std::vector<double> x(20000);
  for (auto& v : x) v = sample_waiting_time(rng, spec);
  const double d = oracle::ks_statistic(x, [](double t) { return oracle::weibull_cdf(t, 1.0, 1.1); });
  CHECK(oracle::ks_pvalue(d, x.size()) < 1e-3);
}

TEST_CASE("schedules are reproducible per (seed, trajectory)") {
  const auto spec = NoiseSpec::make(1.0, 2.0, 11);
  auto run = [&](std::uint64_t traj) {
    auto s = init_schedule(6, spec, traj);
    std::vector<CollisionEvent> ev;
    for (int i = 0; i < 200; ++i) ev.push_back(*pop_next_event(s, spec));
    return ev;
  };
  const auto a = run(4);
  CHECK(a == run(4));
  CHECK(a != run(5));
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i].time >= a[i - 1].time);
  const auto other_seed = NoiseSpec::make(1.0, 2.0, 12);
  auto s = init_schedule(6, other_seed, 4);
  CHECK(*pop_next_event(s, other_seed) != a.front());
}

TEST_CASE("per-site streams do not depend on the chain length") {
  // site i's first collision depends only on (seed, trajectory, i)
  const auto spec = NoiseSpec::make(5.0, 1.0, 2);
  const auto s4 = init_schedule(4, spec, 0);
  const auto s9 = init_schedule(9, spec, 0);
  for (int i = 0; i < 4; ++i) CHECK(s4.next_times()[static_cast<std::size_t>(i)] == s9.next_times()[static_cast<std::size_t>(i)]);
}

TEST_CASE("closed systems and inactive sites never collide") {
  for (auto spec : {NoiseSpec::make(1.0, 0.0, 1), NoiseSpec::make(0.0, 3.0, 1)}) {
    auto s = init_schedule(5, spec, 0);
    CHECK_FALSE(pop_next_event(s, spec).has_value());
  }
  const auto spec = NoiseSpec::make(1.0, 5.0, 1, {1, 3});
  auto s = init_schedule(5, spec, 0);
  for (int i = 0; i < 500; ++i) {
    const auto ev = pop_next_event(s, spec);
    REQUIRE(ev);
    CHECK((ev->site == 1 || ev->site == 3));
  }
  CHECK(std::isinf(s.next_times()[0]));
}

TEST_CASE("noise validation") {
  CHECK_THROWS_AS(NoiseSpec::make(-1.0, 1.0, 1), ParameterError);
  CHECK_THROWS_AS(NoiseSpec::make(1.0, -0.1, 1), ParameterError);
  CHECK_THROWS_AS(NoiseSpec::make(1.0, std::nan(""), 1), ParameterError);
  CHECK_THROWS_AS(NoiseSpec::make(1.0, 1.0, 1, {-1}), ParameterError);
}

TEST_CASE("histogram counts every event inside the horizon") {
  std::vector<CollisionEvent> ev{{0, 0.05}, {0, 0.15}, {2, 0.15}, {2, 0.99}, {1, 1.2}};
  const auto h = collision_histogram(ev, 3, 0.1, 1.0);
  CHECK(h.n_bins == 10);
  CHECK(h.at(0, 0) == 1);
  CHECK(h.at(0, 1) == 1);
  CHECK(h.at(2, 1) == 1);
  CHECK(h.at(2, 9) == 1);
  CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == 4);
}
