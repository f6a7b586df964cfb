#include "xxzcoll/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <mutex>
#include <thread>

#include "xxzcoll/errors.hpp"
#include "xxzcoll/observables.hpp"

namespace xxzcoll {
namespace {

// Real and imaginary parts side by side so that the real eigenvector matrix
// multiplies both with one GEMM.
using SplitAmplitudes = Eigen::Matrix<double, Eigen::Dynamic, 2>;

Eigen::VectorXcd to_complex(const SplitAmplitudes& a) {
  Eigen::VectorXcd z(a.rows());
  z.real() = a.col(0);
  z.imag() = a.col(1);
  return z;
}

void rotate_phases(SplitAmplitudes& coef, const Eigen::VectorXd& energies, double elapsed) {
  for (Eigen::Index n = 0; n < coef.rows(); ++n) {
    const double phi = -energies(n) * elapsed;
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double re = coef(n, 0);
    const double im = coef(n, 1);
    coef(n, 0) = re * c - im * s;
    coef(n, 1) = re * s + im * c;
  }
}

// Yields collisions either from a live schedule or from a recorded list.
class EventFeed {
 public:
  EventFeed(CollisionSchedule schedule, const NoiseSpec& noise) : schedule_(std::move(schedule)), noise_(&noise) {}
  explicit EventFeed(std::span<const CollisionEvent> replay) : replay_(replay) {}

  std::optional<CollisionEvent> peek() const {
    if (noise_ != nullptr) return schedule_.peek();
    if (pos_ < replay_.size()) return replay_[pos_];
    return std::nullopt;
  }

  void pop() {
    if (noise_ != nullptr) {
      pop_next_event(schedule_, *noise_);
    } else {
      ++pos_;
    }
  }

 private:
  CollisionSchedule schedule_;
  const NoiseSpec* noise_ = nullptr;
  std::span<const CollisionEvent> replay_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t EnsembleSpec::sample_count() const {
  // The small slack keeps t_final = k * dt from losing its last sample to rounding.
  return static_cast<std::size_t>(std::floor(t_final / dt * (1.0 + 1e-12))) + 1;
}

void EnsembleSpec::validate() const {
  if (n_traj < 1) throw ParameterError("ensemble needs n_traj >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError(fmt::format("dt = {} must be > 0", dt));
  if (!(t_final >= dt) || !std::isfinite(t_final)) {
    throw ParameterError(fmt::format("t_final = {} must be finite and >= dt = {}", t_final, dt));
  }
  if (log_base > 0.0 && log_base == 1.0) throw ParameterError("entropy log base 1 is degenerate");
}

void propagate(TrajectoryState& state, const SectorHamiltonian& H, double t_target) {
  if (!H.diagonalized()) throw ParameterError("propagate: Hamiltonian not diagonalized");
  if (t_target < state.time) {
    throw ParameterError(fmt::format("propagate backwards from {} to {}", state.time, t_target));
  }
  if (state.amplitudes.size() != static_cast<Eigen::Index>(H.dim())) {
    throw ParameterError("propagate: amplitude vector does not match the Hamiltonian");
  }
  if (t_target == state.time) return;
  const Eigen::VectorXcd coef = H.eigenvectors.transpose().cast<std::complex<double>>() * state.amplitudes;
  const double elapsed = t_target - state.time;
  Eigen::VectorXcd phased(coef.size());
  for (Eigen::Index n = 0; n < coef.size(); ++n) {
    phased(n) = std::polar(1.0, -H.eigenvalues(n) * elapsed) * coef(n);
  }
  state.amplitudes = H.eigenvectors.cast<std::complex<double>>() * phased;
  state.time = t_target;
}

void apply_collision(TrajectoryState& state, const SectorBasis& basis, int site) {
  if (site < 0 || site >= basis.n_sites()) {
    throw ParameterError(fmt::format("collision site {} outside chain of {} sites", site, basis.n_sites()));
  }
  if (state.amplitudes.size() != static_cast<Eigen::Index>(basis.dim())) {
    throw ParameterError("apply_collision: amplitude vector does not match the basis");
  }
  const auto states = basis.states();
  for (std::size_t j = 0; j < states.size(); ++j) {
    if (!occupied(states[j], site)) state.amplitudes(static_cast<Eigen::Index>(j)) *= -1.0;
  }
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
  n_traj += other.n_traj;
  population_sums += other.population_sums;
  if (entropy_sums.size() > 0) entropy_sums += other.entropy_sums;
  for (std::size_t k = 0; k < reduced_sums.size(); ++k) {
    for (std::size_t b = 0; b < reduced_sums[k].size(); ++b) reduced_sums[k][b] += other.reduced_sums[k][b];
  }
  for (std::size_t k = 0; k < density_sums.size(); ++k) density_sums[k] += other.density_sums[k];
  max_norm_error = std::max(max_norm_error, other.max_norm_error);
  collisions += other.collisions;
}

TrajectoryEngine::TrajectoryEngine(const SectorHamiltonian& H, NoiseSpec noise, EnsembleSpec ensemble,
                                   Eigen::VectorXcd initial_state)
    : H_(H), noise_(std::move(noise)), ensemble_(std::move(ensemble)), psi0_(std::move(initial_state)) {
  if (!H_.basis || !H_.diagonalized()) throw ParameterError("engine needs a diagonalized Hamiltonian");
  ensemble_.validate();
  const SectorBasis& b = *H_.basis;
  if (psi0_.size() != static_cast<Eigen::Index>(b.dim())) {
    throw ParameterError(fmt::format("initial state has {} amplitudes, sector has {}", psi0_.size(), b.dim()));
  }
  if (std::abs(psi0_.norm() - 1.0) > 1e-9) {
    throw ParameterError(fmt::format("initial state norm {} differs from 1", psi0_.norm()));
  }
  for (int s : noise_.active_sites) {
    if (s < 0 || s >= b.n_sites()) throw ParameterError(fmt::format("active collision site {} outside chain", s));
  }
  if (ensemble_.cut) bipartition_ = bipartition_factorization(b, *ensemble_.cut);
  if (ensemble_.record_density) {
    const double bytes = static_cast<double>(ensemble_.sample_count()) * static_cast<double>(b.dim()) *
                         static_cast<double>(b.dim()) * sizeof(std::complex<double>);
    if (bytes > static_cast<double>(ensemble_.max_density_bytes)) {
      throw CapacityError(fmt::format("density recording needs {:.3g} bytes, cap is {}", bytes,
                                      ensemble_.max_density_bytes));
    }
  }
  site_signs_.reserve(static_cast<std::size_t>(b.n_sites()));
  const auto states = b.states();
  for (int i = 0; i < b.n_sites(); ++i) {
    Eigen::VectorXd z(static_cast<Eigen::Index>(b.dim()));
    for (std::size_t j = 0; j < states.size(); ++j) z(static_cast<Eigen::Index>(j)) = occupied(states[j], i) ? 1.0 : -1.0;
    site_signs_.push_back(std::move(z));
  }
}

EnsembleAccumulator TrajectoryEngine::make_accumulator() const {
  const auto S = static_cast<Eigen::Index>(ensemble_.sample_count());
  const auto dim = static_cast<Eigen::Index>(H_.dim());
  EnsembleAccumulator acc;
  acc.population_sums = Eigen::MatrixXd::Zero(dim, S);
  if (bipartition_) {
    if (ensemble_.entropy_mode == EntropyMode::TrajectoryAverage) {
      acc.entropy_sums = Eigen::VectorXd::Zero(S);
    } else {
      std::vector<Eigen::MatrixXcd> zero_blocks;
      for (const auto& block : bipartition_->blocks) {
        const auto L = static_cast<Eigen::Index>(block.rows());
        zero_blocks.push_back(Eigen::MatrixXcd::Zero(L, L));
      }
      acc.reduced_sums.assign(static_cast<std::size_t>(S), zero_blocks);
    }
  }
  if (ensemble_.record_density) acc.density_sums.assign(static_cast<std::size_t>(S), Eigen::MatrixXcd::Zero(dim, dim));
  return acc;
}

void TrajectoryEngine::run_trajectory(std::uint64_t index, EnsembleAccumulator& acc,
                                      std::vector<CollisionEvent>* events_out,
                                      std::optional<std::span<const CollisionEvent>> replay) const {
  const auto& V = H_.eigenvectors;
  const auto& energies = H_.eigenvalues;
  const int n_sites = H_.basis->n_sites();
  if (replay) {
    double last = 0.0;
    for (const auto& ev : *replay) {
      if (ev.site < 0 || ev.site >= n_sites) throw ParameterError(fmt::format("replayed event at site {}", ev.site));
      if (!(ev.time >= last)) throw ParameterError("replayed events must be time-ordered and non-negative");
      last = ev.time;
    }
  }
  EventFeed feed = replay ? EventFeed(*replay) : EventFeed(init_schedule(n_sites, noise_, index), noise_);

  SplitAmplitudes psi(psi0_.size(), 2);
  psi.col(0) = psi0_.real();
  psi.col(1) = psi0_.imag();
  SplitAmplitudes coef(psi0_.size(), 2);
  bool psi_valid = true;
  bool coef_valid = false;
  double t = 0.0;

  auto need_coef = [&] {
    if (!coef_valid) {
      coef.noalias() = V.transpose() * psi;
      coef_valid = true;
    }
  };
  auto need_psi = [&] {
    if (!psi_valid) {
      psi.noalias() = V * coef;
      psi_valid = true;
    }
  };
  auto evolve_to = [&](double t_new) {
    if (t_new == t) return;
    need_coef();
    rotate_phases(coef, energies, t_new - t);
    psi_valid = false;
    t = t_new;
  };

  const std::size_t S = ensemble_.sample_count();
  for (std::size_t k = 0; k < S; ++k) {
    const double ts = ensemble_.sample_time(k);
    for (auto ev = feed.peek(); ev && ev->time <= ts; ev = feed.peek()) {
      evolve_to(ev->time);
      need_psi();
      psi.array().colwise() *= site_signs_[static_cast<std::size_t>(ev->site)].array();
      coef_valid = false;
      ++acc.collisions;
      if (events_out != nullptr) events_out->push_back(*ev);
      feed.pop();
    }
    evolve_to(ts);
    need_psi();

    const auto col = static_cast<Eigen::Index>(k);
    acc.max_norm_error = std::max(acc.max_norm_error, std::abs(std::sqrt(psi.squaredNorm()) - 1.0));
    acc.population_sums.col(col) += psi.rowwise().squaredNorm();
    if (bipartition_ || ensemble_.record_density) {
      const Eigen::VectorXcd z = to_complex(psi);
      if (bipartition_) {
        if (ensemble_.entropy_mode == EntropyMode::TrajectoryAverage) {
          acc.entropy_sums(col) += entanglement_entropy(z, *bipartition_, ensemble_.log_base);
        } else {
          const auto blocks = reduced_density_left(z, *bipartition_);
          for (std::size_t b = 0; b < blocks.size(); ++b) acc.reduced_sums[k][b] += blocks[b];
        }
      }
      if (ensemble_.record_density) acc.density_sums[k].noalias() += z * z.adjoint();
    }
  }
  ++acc.n_traj;
}

EnsembleResult TrajectoryEngine::finalize(EnsembleAccumulator&& total, std::vector<ChunkSums> chunks,
                                          std::vector<std::vector<CollisionEvent>> events) const {
  EnsembleResult r;
  r.n_traj = total.n_traj;
  const std::size_t S = ensemble_.sample_count();
  r.times.resize(S);
  for (std::size_t k = 0; k < S; ++k) r.times[k] = ensemble_.sample_time(k);
  const double inv = 1.0 / static_cast<double>(total.n_traj);
  r.populations = total.population_sums * inv;
  if (bipartition_) {
    if (ensemble_.entropy_mode == EntropyMode::TrajectoryAverage) {
      r.entropy = total.entropy_sums * inv;
    } else {
      Eigen::VectorXd s(static_cast<Eigen::Index>(S));
      for (std::size_t k = 0; k < S; ++k) {
        for (auto& b : total.reduced_sums[k]) b *= inv;
        s(static_cast<Eigen::Index>(k)) = entropy_from_spectrum(block_spectrum(total.reduced_sums[k]), ensemble_.log_base);
      }
      r.entropy = std::move(s);
    }
  }
  if (ensemble_.record_density) {
    r.density = std::move(total.density_sums);
    for (auto& m : r.density) m *= inv;
  }
  r.chunks = std::move(chunks);
  r.events = std::move(events);
  r.max_norm_error = total.max_norm_error;
  r.total_collisions = total.collisions;
  return r;
}

EnsembleResult TrajectoryEngine::run_ensemble(std::size_t n_workers) const {
  const std::size_t M = ensemble_.n_traj;
  const std::size_t n_chunks = (M + kChunkSize - 1) / kChunkSize;
  n_workers = std::clamp<std::size_t>(n_workers, 1, n_chunks);

  std::vector<std::vector<CollisionEvent>> events(ensemble_.record_events ? M : 0);
  std::vector<ChunkSums> chunk_stats;
  EnsembleAccumulator total = make_accumulator();

  // Chunks finish in any order but are merged strictly in index order.
  std::vector<std::optional<EnsembleAccumulator>> ready(n_chunks);
  std::size_t next_merge = 0;
  std::mutex merge_mutex;
  std::atomic<std::size_t> next_chunk{0};
  std::exception_ptr failure;

  auto worker = [&] {
    try {
      for (std::size_t c = next_chunk++; c < n_chunks; c = next_chunk++) {
        EnsembleAccumulator acc = make_accumulator();
        const std::size_t end = std::min(M, (c + 1) * kChunkSize);
        for (std::size_t i = c * kChunkSize; i < end; ++i) {
          run_trajectory(i, acc, ensemble_.record_events ? &events[i] : nullptr);
        }
        std::lock_guard lock(merge_mutex);
        ready[c] = std::move(acc);
        while (next_merge < n_chunks && ready[next_merge]) {
          auto& done = *ready[next_merge];
          total.merge(done);
          if (ensemble_.chunk_statistics) {
            chunk_stats.push_back(ChunkSums{done.n_traj, std::move(done.population_sums), std::move(done.entropy_sums)});
          }
          ready[next_merge].reset();
          ++next_merge;
        }
      }
    } catch (...) {
      std::lock_guard lock(merge_mutex);
      if (!failure) failure = std::current_exception();
      next_chunk = n_chunks;
    }
  };

  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return finalize(std::move(total), std::move(chunk_stats), std::move(events));
}

}  // namespace xxzcoll
