// Acceptance checks at paper scale. One PASS/FAIL line per criterion; exit
// status is the number of failures. Optional arguments select criteria by
// substring of their names.
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <functional>
#include <numeric>
#include <random>
#include <thread>

#include "oracle.hpp"
#include "xxzcoll/config.hpp"
#include "xxzcoll/experiment.hpp"
#include "xxzcoll/hamiltonian.hpp"
#include "xxzcoll/observables.hpp"
#include "xxzcoll/presets.hpp"
#include "xxzcoll/rng.hpp"
#include "xxzcoll/trajectory.hpp"

using namespace xxzcoll;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::size_t workers() { return std::max(1U, std::thread::hardware_concurrency()); }

PointResult simulate(const std::string& text) { return simulate_point(parse_config(text), workers()); }

double window_mean(const std::vector<double>& times, const std::vector<double>& v, double a, double b) {
  double s = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] >= a - 1e-9 && times[k] <= b + 1e-9) {
      s += v[k];
      ++n;
    }
  }
  return s / n;
}

// Linear interpolation of (x, y) at x0, x sorted ascending.
double interp(const std::vector<double>& x, const std::vector<double>& y, double x0) {
  const auto it = std::upper_bound(x.begin(), x.end(), x0);
  if (it == x.begin()) return y.front();
  if (it == x.end()) return y.back();
  const auto i = static_cast<std::size_t>(it - x.begin());
  const double w = (x0 - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * y[i - 1] + w * y[i];
}

// ---------------------------------------------------------------------------

Outcome dephasing() {
  auto basis = std::make_shared<const SectorBasis>(2, 1);
  ChainSpec spec;
  spec.n_sites = 2;
  spec.J = 0.0;
  spec.fields = {0.0, 0.0};
  auto H = build_hamiltonian(basis, spec);
  diagonalize(H);
  Eigen::VectorXcd psi0(2);
  psi0 << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  const double rc = 1.0;
  EnsembleSpec ens;
  ens.n_traj = 10000;
  ens.dt = 0.05;
  ens.t_final = 3.0 / rc;
  ens.record_density = true;
  const double tol = 5.0 / std::sqrt(static_cast<double>(ens.n_traj));
  double worst_both = 0.0, worst_single = 0.0;
  for (bool both : {true, false}) {
    const auto noise = NoiseSpec::make(1.0, rc, 1, both ? std::vector<int>{} : std::vector<int>{0});
    TrajectoryEngine engine(H, noise, ens, psi0);
    const auto r = engine.run_ensemble(workers());
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      const double c = 2.0 * r.density[k](0, 1).real();
      const double err = std::abs(c - std::exp(-(both ? 4.0 : 2.0) * rc * r.times[k]));
      (both ? worst_both : worst_single) = std::max(both ? worst_both : worst_single, err);
    }
  }
  return {worst_both <= tol && worst_single <= tol,
          fmt::format("max |err| both-site {:.4f}, single-site {:.4f}, tol {:.4f}", worst_both, worst_single, tol)};
}

Outcome weibull() {
  const double rc = 0.1;
  std::string detail;
  bool ok = true;
  for (double nu : {1.0, 5.0, 100.0}) {
    const auto spec = NoiseSpec::make(nu, rc, 1);
    CounterRng ks_stream(derive_key(1, static_cast<std::uint64_t>(StreamPurpose::Auxiliary), 1, static_cast<std::uint64_t>(nu)));
    std::vector<double> x(100000);
    for (auto& v : x) v = sample_waiting_time(ks_stream, spec);
    const double d = oracle::ks_statistic(x, [&](double t) { return oracle::weibull_cdf(t, nu, rc); });
    const double p = oracle::ks_pvalue(d, x.size());
    CounterRng mean_stream(derive_key(1, static_cast<std::uint64_t>(StreamPurpose::Auxiliary), 2, static_cast<std::uint64_t>(nu)));
    double sum = 0.0;
    const int n_mean = 1000000;
    for (int i = 0; i < n_mean; ++i) sum += sample_waiting_time(mean_stream, spec);
    const double rel = std::abs(sum / n_mean * rc - 1.0);
    ok = ok && p > 1e-3 && rel < 0.005;
    detail += fmt::format("nu={} KS p={:.3g} mean err={:.3f}%; ", nu, p, 100.0 * rel);
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

Outcome brute_force() {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int sectors = 0;
  for (int n = 1; n <= 4; ++n) {
    for (int q = 0; q <= n; ++q) {
      auto basis = std::make_shared<const SectorBasis>(n, q);
      const auto spec = ChainSpec::with_disorder(n, 1.0, 4.0 * u(gen) - 2.0, 5.0 * u(gen), gen() % 10000);
      auto H = build_hamiltonian(basis, spec);
      diagonalize(H);
      EnsembleSpec ens;
      ens.n_traj = 8;
      ens.dt = 0.1;
      ens.t_final = 3.0;
      ens.record_density = true;
      ens.record_events = true;
      std::normal_distribution<double> g;
      Eigen::VectorXcd psi0(static_cast<Eigen::Index>(basis->dim()));
      for (Eigen::Index i = 0; i < psi0.size(); ++i) psi0(i) = {g(gen), g(gen)};
      psi0.normalize();
      TrajectoryEngine engine(H, NoiseSpec::make(0.5 + 3.0 * u(gen), 2.0 * u(gen) + 0.2, gen() % 10000), ens, psi0);
      const auto r = engine.run_ensemble(workers());

      const oracle::Mat Hf = oracle::full_hamiltonian(n, spec.J, spec.delta, spec.fields);
      Eigen::VectorXcd full = Eigen::VectorXcd::Zero(Eigen::Index{1} << n);
      for (std::size_t j = 0; j < basis->dim(); ++j) full(static_cast<Eigen::Index>(basis->states()[j])) = psi0(static_cast<Eigen::Index>(j));
      std::vector<oracle::Mat> avg(r.times.size(), oracle::Mat::Zero(full.size(), full.size()));
      for (const auto& traj : r.events) {
        std::vector<oracle::Kick> kicks;
        for (const auto& e : traj) kicks.push_back({e.site, e.time});
        const auto rho = oracle::evolve_with_kicks(n, Hf, full, kicks, r.times);
        for (std::size_t k = 0; k < rho.size(); ++k) avg[k] += rho[k] / static_cast<double>(r.events.size());
      }
      for (std::size_t k = 0; k < r.times.size(); ++k) {
        // entries outside the sector must vanish, entries inside must agree
        for (Eigen::Index a = 0; a < full.size(); ++a) {
          for (Eigen::Index b = 0; b < full.size(); ++b) {
            std::complex<double> engine_value = 0.0;
            if (std::popcount(static_cast<unsigned>(a)) == q && std::popcount(static_cast<unsigned>(b)) == q) {
              engine_value = r.density[k](static_cast<Eigen::Index>(basis->rank(static_cast<Pattern>(a))),
                                          static_cast<Eigen::Index>(basis->rank(static_cast<Pattern>(b))));
            }
            worst = std::max(worst, std::abs(engine_value - avg[k](a, b)));
          }
        }
      }
      ++sectors;
    }
  }
  return {worst <= 1e-9, fmt::format("{} sectors, max entrywise deviation {:.2e} (tol 1e-9)", sectors, worst)};
}

Outcome closed_bound() {
  const auto clean = simulate("chain.n_sites = 41\nchain.h = 0\nnoise.rc = 0\nensemble.n_traj = 1\ninit.preset = single_center\n");
  const auto dirty = simulate("chain.n_sites = 41\nchain.h = 10\nnoise.rc = 0\nensemble.n_traj = 1\ninit.preset = single_center\n");
  const double avg = window_mean(clean.series.times, *clean.series.ipr, 20.0, 30.0);
  const double last = dirty.series.ipr->back();
  const double floor = 1.0 / 41.0;
  const bool ok = avg <= 3.0 * floor && avg >= floor / 3.0 && last > 10.0 * floor;
  return {ok, fmt::format("h=0 mean IPR[20,30]={:.4f} (1/41={:.4f}, allowed [{:.4f}, {:.4f}]); h=10 IPR(30)={:.3f} > {:.3f}",
                          avg, floor, floor / 3.0, 3.0 * floor, last, 10.0 * floor)};
}

const char* kSingle =
    "chain.n_sites = 41\nchain.h = 10\nnoise.nu = 100\nensemble.n_traj = 500\ninit.preset = single_center\n";

Outcome stroboscopic() {
  const auto closed = simulate(std::string(kSingle) + "noise.rc = 0\n");
  const auto noisy = simulate(std::string(kSingle) + "noise.rc = 0.1\n");
  const double D = noisy.report.metrics.D;
  const auto& t = noisy.series.times;
  double worst = 0.0;
  std::size_t n_bad = 0;
  for (std::size_t k = 0; k < t.size() && t[k] < 10.0; ++k) {
    const double diff = std::abs((*noisy.series.ipr)[k] - (*closed.series.ipr)[k]);
    const double se = std::hypot((*noisy.series.ipr_stderr)[k], (*closed.series.ipr_stderr)[k]);
    if (diff > 0.0) worst = std::max(worst, se > 0.0 ? diff / se : std::numeric_limits<double>::infinity());
    if (diff > 2.0 * se) ++n_bad;
  }
  const bool ok = D >= 7.0 && D <= 13.0 && n_bad == 0;
  return {ok, fmt::format("D={:.2f} (allowed [7, 13]); tJ<10 worst |diff|/SE={:.2f}, {} samples beyond 2 SE", D, worst,
                          n_bad)};
}

Outcome zeno() {
  std::vector<double> rates{1.0, 5.0, 50.0, 100.0};
  std::vector<double> ipr_final, se_final;
  for (double rc : rates) {
    const auto p = simulate(std::string(kSingle) + fmt::format("noise.rc = {}\n", rc));
    ipr_final.push_back(p.series.ipr->back());
    se_final.push_back(p.series.ipr_stderr->back());
  }
  const bool increasing = ipr_final[1] < ipr_final[2] && ipr_final[2] < ipr_final[3];
  const double gap = ipr_final[3] - ipr_final[0];
  const double se = std::hypot(se_final[3], se_final[0]);
  const bool ok = increasing && gap >= 3.0 * se;
  return {ok, fmt::format("IPR(30): rc=1 {:.4f}, rc=5 {:.4f}, rc=50 {:.4f}, rc=100 {:.4f}; rc100-rc1 = {:.4f} = {:.1f} SE",
                          ipr_final[0], ipr_final[1], ipr_final[2], ipr_final[3], gap, gap / se)};
}

std::string two_exc(double h, double rc, double nu = 100.0) {
  return fmt::format(
      "chain.n_sites = 20\nchain.h = {}\nchain.delta = 2.5\nnoise.nu = {}\nnoise.rc = {}\nensemble.n_traj = 250\n"
      "init.preset = two_separated\n",
      h, nu, rc);
}

Outcome collapse() {
  std::vector<std::vector<double>> xs, ys;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  std::string detail;
  for (double rc : {0.2, 0.5, 1.0}) {
    const auto p = simulate(two_exc(10.0, rc));
    xs.push_back(collapse_transform(p.series.times, rc));
    ys.push_back(p.series.ier);
    if (p.report.plateaus.empty()) return {false, fmt::format("no plateau detected for rc={}", rc)};
    const auto& first = p.report.plateaus.front();
    lo = std::max(lo, first.t_start * rc);
    hi = std::min(hi, first.t_end * rc);
    detail += fmt::format("rc={} plateau x=[{:.2f},{:.2f}] height {:.3f}; ", rc, first.t_start * rc, first.t_end * rc,
                          first.height);
  }
  if (!(hi > lo)) return {false, detail + "first plateaus do not overlap"};
  double spread = 0.0;
  for (double x = lo; x <= hi; x += 0.005) {
    double mn = 1e9, mx = -1e9;
    for (std::size_t c = 0; c < xs.size(); ++c) {
      const double y = interp(xs[c], ys[c], x);
      mn = std::min(mn, y);
      mx = std::max(mx, y);
    }
    spread = std::max(spread, mx - mn);
  }
  return {spread <= 0.2, detail + fmt::format("region x in [{:.2f}, {:.2f}], max spread {:.3f} (band 2 x 0.1)", lo, hi, spread)};
}

Outcome area() {
  bool ok = true;
  std::string detail;
  for (double rc : {0.1, 0.2, 0.5}) {
    const double a = simulate(two_exc(10.0, rc)).report.metrics.area;
    ok = ok && a >= 0.1 && a <= 0.3;
    detail += fmt::format("h=10 rc={} area={:.3f}; ", rc, a);
  }
  for (double h : {0.5, 1.0}) {
    for (double rc : {0.1, 0.2, 0.5}) {
      const double a = simulate(two_exc(h, rc)).report.metrics.area;
      ok = ok && a < 0.05;
      detail += fmt::format("h={} rc={} area={:.3f}; ", h, rc, a);
    }
  }
  detail.resize(detail.size() - 2);
  return {ok, detail + " (want [0.1, 0.3] at h=10, < 0.05 at low h)"};
}

Outcome tau_partition() {
  bool ok = true;
  std::string detail;
  for (double h : {0.5, 10.0}) {
    for (double rc : {0.5, 2.0, 8.0}) {
      const auto p = simulate(two_exc(h, rc));
      const auto& tau = p.report.tau;
      if (rc > h) ok = ok && !tau.beyond_horizon && tau.time <= 10.0;
      if (h == 10.0 && rc <= 1.0) ok = ok && tau.beyond_horizon;
      detail += fmt::format("(h={}, rc={}) tau={}{}; ", h, rc, tau.time, tau.beyond_horizon ? "+" : "");
    }
  }
  detail.resize(detail.size() - 2);
  return {ok, detail + " (+ = beyond horizon 30)"};
}

Outcome entropy() {
  auto run = [](double nu) {
    return simulate(fmt::format("chain.n_sites = 20\nchain.h = 10\nchain.delta = 2.5\nnoise.nu = {}\nnoise.rc = 0.1\n"
                                "ensemble.n_traj = 250\nensemble.cut = 10\ninit.preset = two_adjacent\n",
                                nu));
  };
  const auto closed = run(0.0);
  const auto strobe = run(100.0);
  const auto poisson = run(1.0);
  const auto& t = closed.series.times;

  // least-squares slope over [5, 30] times the window length
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < 5.0 - 1e-9) continue;
    const double y = (*closed.series.svn)[k];
    sx += t[k];
    sy += y;
    sxx += t[k] * t[k];
    sxy += t[k] * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double drift = std::abs(slope) * 25.0;

  const auto& s = *strobe.series.svn;
  const double w0 = window_mean(t, s, 5.0, 9.5);
  const double w1 = window_mean(t, s, 10.5, 19.5);
  const double w2 = window_mean(t, s, 20.5, 29.5);
  const double end_poisson = poisson.series.svn->back();
  const double end_strobe = s.back();
  const bool ok = drift < 0.05 && w1 - w0 >= 0.1 && w2 - w1 >= 0.1 && end_poisson > end_strobe;
  return {ok, fmt::format("nu=0 drift {:.4f} (< 0.05); nu=100 band gains {:.3f}, {:.3f} (>= 0.1); S(30) nu=1 {:.3f} vs "
                          "nu=100 {:.3f}",
                          drift, w1 - w0, w2 - w1, end_poisson, end_strobe)};
}

Outcome invariants() {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double norm_err = 0, trace_err = 0, mag_err = 0, sym_err = 0, bound_violation = 0;
  std::size_t rank_fail = 0, checks = 0;
  for (int trial = 0; trial < 24; ++trial) {
    const int n = 3 + static_cast<int>(gen() % 8);
    const int q = static_cast<int>(gen() % static_cast<std::uint64_t>(n + 1));
    auto basis = std::make_shared<const SectorBasis>(n, q);
    for (std::size_t j = 0; j < basis->dim(); ++j) rank_fail += basis->rank(basis->unrank(j)) != j;
    const auto spec = ChainSpec::with_disorder(n, 1.0, 5.0 * u(gen) - 2.5, 10.0 * u(gen), gen() % 1000);
    auto H = build_hamiltonian(basis, spec);
    diagonalize(H);
    EnsembleSpec ens;
    ens.n_traj = 16;
    ens.dt = 0.1;
    ens.t_final = 4.0;
    ens.record_density = true;
    std::normal_distribution<double> g;
    Eigen::VectorXcd psi0(static_cast<Eigen::Index>(basis->dim()));
    for (Eigen::Index i = 0; i < psi0.size(); ++i) psi0(i) = {g(gen), g(gen)};
    psi0.normalize();
    TrajectoryEngine engine(H, NoiseSpec::make(0.5 + 5.0 * u(gen), 3.0 * u(gen), gen() % 1000), ens, psi0);
    const auto r = engine.run_ensemble(workers());
    norm_err = std::max(norm_err, r.max_norm_error);
    const auto s = compute_series(r, *basis);
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      const auto col = static_cast<Eigen::Index>(k);
      trace_err = std::max(trace_err, std::abs(r.density[k].trace().real() - 1.0));
      double mag = 0.0;
      for (Eigen::Index i = 0; i < s.site_density.rows(); ++i) mag += s.site_density(i, col);
      mag_err = std::max(mag_err, std::abs(mag - q));
      const double lo = 1.0 / static_cast<double>(basis->dim());
      bound_violation = std::max({bound_violation, lo - s.ier[k] - 1e-14, s.ier[k] - 1.0 - 1e-14});
      if (s.ipr) bound_violation = std::max({bound_violation, lo - (*s.ipr)[k] - 1e-14, (*s.ipr)[k] - 1.0 - 1e-14});
      ++checks;
    }
    if (n >= 2) {
      const int cut = 1 + static_cast<int>(gen() % static_cast<std::uint64_t>(n - 1));
      const auto bp = bipartition_factorization(*basis, cut);
      Eigen::VectorXcd psi(static_cast<Eigen::Index>(basis->dim()));
      for (Eigen::Index i = 0; i < psi.size(); ++i) psi(i) = {g(gen), g(gen)};
      psi.normalize();
      const double sa = entropy_from_spectrum(block_spectrum(reduced_density_left(psi, bp)));
      const double sb = entropy_from_spectrum(block_spectrum(reduced_density_right(psi, bp)));
      sym_err = std::max(sym_err, std::abs(sa - sb));
    }
  }
  const bool ok = norm_err < 1e-10 && trace_err < 1e-10 && mag_err < 1e-10 && sym_err < 1e-10 && rank_fail == 0 &&
                  bound_violation <= 0.0;
  return {ok, fmt::format("{} samples: norm {:.1e}, trace {:.1e}, magnetization {:.1e}, S(A)-S(B) {:.1e}, "
                          "rank/unrank failures {}, bound violations {}",
                          checks, norm_err, trace_err, mag_err, sym_err, rank_fail, bound_violation > 0.0 ? 1 : 0)};
}

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"dephasing_oracle", dephasing},
      {"weibull_sampler", weibull},
      {"brute_force_equivalence", brute_force},
      {"closed_delocalization_bound", closed_bound},
      {"stroboscopic_plateau", stroboscopic},
      {"zeno_ordering", zeno},
      {"two_excitation_collapse", collapse},
      {"plateau_area_saturation", area},
      {"tau_region_partition", tau_partition},
      {"entropy_behavior", entropy},
      {"invariant_suite", invariants},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (argc > 1) {
      bool selected = false;
      for (int i = 1; i < argc; ++i) selected = selected || c.name.find(argv[i]) != std::string::npos;
      if (!selected) continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    fmt::print("[{}] {} ({:.1f} s): {}\n", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures;
}
