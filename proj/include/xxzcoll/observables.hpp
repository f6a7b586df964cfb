#pragma once

#include <Eigen/Dense>
#include <functional>
#include <json.hpp>
#include <optional>
#include <span>
#include <vector>

#include "xxzcoll/sector_basis.hpp"
#include "xxzcoll/trajectory.hpp"

namespace xxzcoll {

// Sum_i p_i^2 over site populations. Only meaningful for one excitation;
// throws ContractError when n_exc != 1.
double ipr(std::span<const double> populations, int n_exc);

// Sum_j p_j^2 over the sector basis (1/dim for a uniform spread, 1 for a
// single configuration).
double ier(std::span<const double> populations);

// n_i = sum of p_j over states with site i occupied, i.e. (1 + <sz_i>) / 2.
std::vector<double> site_density(std::span<const double> populations, const SectorBasis& basis);

// n_c - q/N for the 0-based centre site c.
double imbalance(std::span<const double> density, int center_site, int n_exc);

// Entanglement entropy helpers. log_base <= 0 selects the natural logarithm;
// eigenvalues below 1e-14 count as zero.
inline constexpr double kSpectrumFloor = 1e-14;

double entropy_from_spectrum(std::span<const double> spectrum, double log_base = 0.0);

// Blocks of rho_A = Tr_B |psi><psi| (left part) and rho_B (right part), one per
// left-excitation number. Both are block diagonal by number conservation.
std::vector<Eigen::MatrixXcd> reduced_density_left(const Eigen::VectorXcd& psi, const Bipartition& bp);
std::vector<Eigen::MatrixXcd> reduced_density_right(const Eigen::VectorXcd& psi, const Bipartition& bp);
std::vector<Eigen::MatrixXcd> reduced_density_left(const Eigen::MatrixXcd& rho, const Bipartition& bp);

// Concatenated eigenvalues of the blocks; throws ContractError when the
// total trace deviates from 1 by more than 1e-8.
std::vector<double> block_spectrum(std::span<const Eigen::MatrixXcd> blocks);

// S(A) of a pure state, via the smaller Gram matrix of each block.
double entanglement_entropy(const Eigen::VectorXcd& psi, const Bipartition& bp, double log_base = 0.0);
// S(A) of a density matrix over the sector basis.
double entanglement_entropy(const Eigen::MatrixXcd& rho, const Bipartition& bp, double log_base = 0.0);

/// Time series of the figures of merit. Optional members are absent when the
/// observable is undefined for the run (IPR for q != 1, S_vN without a cut).
struct ObservableSeries {
  std::vector<double> times;
  Eigen::MatrixXd populations;   // dim x samples
  Eigen::MatrixXd site_density;  // n_sites x samples
  std::vector<double> ier;
  std::optional<std::vector<double>> ipr;
  std::optional<std::vector<double>> imb;
  std::optional<std::vector<double>> svn;
  // Jackknife standard errors over trajectory chunks (when available).
  std::optional<std::vector<double>> ier_stderr;
  std::optional<std::vector<double>> ipr_stderr;
  std::optional<std::vector<double>> svn_stderr;
  nlohmann::ordered_json metadata;

  std::size_t size() const noexcept { return times.size(); }
};

struct SeriesOptions {
  std::optional<int> center_site;  // 0-based; enables IMB when q == 1
};

ObservableSeries compute_series(const EnsembleResult& result, const SectorBasis& basis,
                                const SeriesOptions& options = {});

// Delete-one-chunk jackknife error of f(mean populations) at every sample.
// Requires result.chunks with at least two entries.
std::vector<double> jackknife_stderr(const EnsembleResult& result,
                                     const std::function<double(std::span<const double>)>& f);

}  // namespace xxzcoll
