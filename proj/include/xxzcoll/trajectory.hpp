#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xxzcoll/collision_noise.hpp"
#include "xxzcoll/hamiltonian.hpp"
#include "xxzcoll/sector_basis.hpp"

namespace xxzcoll {

enum class EntropyMode {
  TrajectoryAverage,  // S of each pure trajectory state, averaged
  AveragedState,      // S of the trajectory-averaged density matrix
};

struct EnsembleSpec {
  std::size_t n_traj = 1;
  double dt = 0.02;       // output grid spacing, 1/J
  double t_final = 30.0;  // horizon, 1/J
  EntropyMode entropy_mode = EntropyMode::TrajectoryAverage;
  std::optional<int> cut;           // left-part size for S_vN; none disables entropy
  double log_base = 0.0;            // <= 0 means natural log
  bool record_density = false;      // keep the full averaged rho(t)
  bool record_events = false;       // keep every trajectory's collision list
  bool chunk_statistics = false;    // keep per-chunk sums for error bars
  std::size_t max_density_bytes = std::size_t{1} << 31;

  // floor(t_final / dt) + 1 samples at t_k = k * dt.
  std::size_t sample_count() const;
  double sample_time(std::size_t k) const noexcept { return static_cast<double>(k) * dt; }
  void validate() const;  // throws ParameterError
};

// Trajectories are summed in fixed chunks of this many consecutive indices;
// the chunk layout is independent of the worker count.
inline constexpr std::size_t kChunkSize = 16;

struct TrajectoryState {
  Eigen::VectorXcd amplitudes;
  double time = 0.0;
  CollisionSchedule schedule;
};

// amplitudes <- V exp(-i Lambda (t_target - time)) V^T amplitudes.
void propagate(TrajectoryState& state, const SectorHamiltonian& H, double t_target);

// Collision at `site`: multiplies each amplitude by z_site (+1 occupied, -1 empty).
void apply_collision(TrajectoryState& state, const SectorBasis& basis, int site);

/// Running sums over trajectories, one column per output sample.
struct EnsembleAccumulator {
  std::size_t n_traj = 0;
  Eigen::MatrixXd population_sums;                       // dim x samples
  Eigen::VectorXd entropy_sums;                          // samples (trajectory-average mode)
  std::vector<std::vector<Eigen::MatrixXcd>> reduced_sums;  // [sample][block], averaged-state mode
  std::vector<Eigen::MatrixXcd> density_sums;            // [sample], when record_density
  double max_norm_error = 0.0;
  std::uint64_t collisions = 0;

  void merge(const EnsembleAccumulator& other);
};

struct ChunkSums {
  std::size_t n_traj = 0;
  Eigen::MatrixXd population_sums;
  Eigen::VectorXd entropy_sums;
};

struct EnsembleResult {
  std::size_t n_traj = 0;
  std::vector<double> times;
  Eigen::MatrixXd populations;             // dim x samples, trajectory-averaged |psi_j|^2
  std::optional<Eigen::VectorXd> entropy;  // per sample, according to entropy_mode
  std::vector<Eigen::MatrixXcd> density;   // averaged rho(t) when record_density
  std::vector<ChunkSums> chunks;           // when chunk_statistics
  std::vector<std::vector<CollisionEvent>> events;  // per trajectory when record_events
  double max_norm_error = 0.0;
  std::uint64_t total_collisions = 0;
};

/// Pure-state trajectory simulator: exact spectral propagation between
/// collisions, sigma^z kicks at sampled collision times. Immutable after
/// construction; `run_trajectory` may be called concurrently.
class TrajectoryEngine {
 public:
  TrajectoryEngine(const SectorHamiltonian& H, NoiseSpec noise, EnsembleSpec ensemble,
                   Eigen::VectorXcd initial_state);

  const EnsembleSpec& ensemble() const noexcept { return ensemble_; }
  const NoiseSpec& noise() const noexcept { return noise_; }
  const SectorBasis& basis() const noexcept { return *H_.basis; }
  const std::optional<Bipartition>& bipartition() const noexcept { return bipartition_; }

  EnsembleAccumulator make_accumulator() const;

  // Runs trajectory `index` and deposits it into `acc`. When `replay` is set
  // its events (sorted by time) are used instead of the sampled schedule.
  // Processed events are appended to `events_out` when non-null.
  void run_trajectory(std::uint64_t index, EnsembleAccumulator& acc,
                      std::vector<CollisionEvent>* events_out = nullptr,
                      std::optional<std::span<const CollisionEvent>> replay = std::nullopt) const;

  // Averages n_traj trajectories; bit-identical for any n_workers >= 1.
  EnsembleResult run_ensemble(std::size_t n_workers = 1) const;

 private:
  EnsembleResult finalize(EnsembleAccumulator&& total, std::vector<ChunkSums> chunks,
                          std::vector<std::vector<CollisionEvent>> events) const;

  const SectorHamiltonian& H_;
  NoiseSpec noise_;
  EnsembleSpec ensemble_;
  Eigen::VectorXcd psi0_;
  std::vector<Eigen::VectorXd> site_signs_;  // z_i over the basis, per site
  std::optional<Bipartition> bipartition_;
};

}  // namespace xxzcoll
