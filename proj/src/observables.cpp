#include "xxzcoll/observables.hpp"

#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "xxzcoll/errors.hpp"

namespace xxzcoll {
namespace {

Eigen::MatrixXcd block_amplitudes(const Eigen::VectorXcd& psi, const BipartitionBlock& block) {
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(block.rows()), static_cast<Eigen::Index>(block.cols()));
  for (std::size_t r = 0; r < block.rows(); ++r) {
    for (std::size_t c = 0; c < block.cols(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          psi(static_cast<Eigen::Index>(block.ordinal(r, c)));
    }
  }
  return m;
}

void append_hermitian_eigenvalues(const Eigen::MatrixXcd& m, std::vector<double>& out) {
  if (m.rows() == 1) {
    out.push_back(m(0, 0).real());
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError(fmt::format("reduced density eigensolver failed ({}x{})", m.rows(), m.cols()));
  }
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()(i));
}

}  // namespace

double ipr(std::span<const double> populations, int n_exc) {
  if (n_exc != 1) {
    throw ContractError(fmt::format("IPR is defined for one excitation, got q = {}; use IER", n_exc));
  }
  return ier(populations);
}

double ier(std::span<const double> populations) {
  double s = 0.0;
  for (double p : populations) s += p * p;
  return s;
}

std::vector<double> site_density(std::span<const double> populations, const SectorBasis& basis) {
  if (populations.size() != basis.dim()) {
    throw ParameterError(fmt::format("{} populations for sector of dimension {}", populations.size(), basis.dim()));
  }
  std::vector<double> n(static_cast<std::size_t>(basis.n_sites()), 0.0);
  const auto states = basis.states();
  for (std::size_t j = 0; j < states.size(); ++j) {
    Pattern p = states[j];
    while (p != 0) {
      n[static_cast<std::size_t>(std::countr_zero(p))] += populations[j];
      p &= p - 1;
    }
  }
  return n;
}

double imbalance(std::span<const double> density, int center_site, int n_exc) {
  if (center_site < 0 || static_cast<std::size_t>(center_site) >= density.size()) {
    throw ParameterError(fmt::format("centre site {} outside chain of {} sites", center_site, density.size()));
  }
  return density[static_cast<std::size_t>(center_site)] -
         static_cast<double>(n_exc) / static_cast<double>(density.size());
}

double entropy_from_spectrum(std::span<const double> spectrum, double log_base) {
  double s = 0.0;
  for (double l : spectrum) {
    if (l > kSpectrumFloor) s -= l * std::log(l);
  }
  if (log_base > 0.0) s /= std::log(log_base);
  // -0.0 for product states reads badly in CSV output.
  return s == 0.0 ? 0.0 : s;
}

std::vector<Eigen::MatrixXcd> reduced_density_left(const Eigen::VectorXcd& psi, const Bipartition& bp) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(bp.blocks.size());
  for (const auto& block : bp.blocks) {
    const Eigen::MatrixXcd m = block_amplitudes(psi, block);
    out.push_back(m * m.adjoint());
  }
  return out;
}

std::vector<Eigen::MatrixXcd> reduced_density_right(const Eigen::VectorXcd& psi, const Bipartition& bp) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(bp.blocks.size());
  for (const auto& block : bp.blocks) {
    const Eigen::MatrixXcd m = block_amplitudes(psi, block);
    // (rho_B)_{c c'} = sum_r psi_{r c} conj(psi_{r c'})
    out.push_back(m.transpose() * m.conjugate());
  }
  return out;
}

std::vector<Eigen::MatrixXcd> reduced_density_left(const Eigen::MatrixXcd& rho, const Bipartition& bp) {
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(bp.blocks.size());
  for (const auto& block : bp.blocks) {
    const auto L = static_cast<Eigen::Index>(block.rows());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(L, L);
    for (std::size_t r = 0; r < block.rows(); ++r) {
      for (std::size_t r2 = 0; r2 < block.rows(); ++r2) {
        std::complex<double> s = 0.0;
        for (std::size_t c = 0; c < block.cols(); ++c) {
          s += rho(static_cast<Eigen::Index>(block.ordinal(r, c)), static_cast<Eigen::Index>(block.ordinal(r2, c)));
        }
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r2)) = s;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<double> block_spectrum(std::span<const Eigen::MatrixXcd> blocks) {
  double trace = 0.0;
  for (const auto& b : blocks) trace += b.trace().real();
  if (std::abs(trace - 1.0) > 1e-8) {
    throw ContractError(fmt::format("reduced density matrix has trace {}, expected 1", trace));
  }
  std::vector<double> spectrum;
  for (const auto& b : blocks) append_hermitian_eigenvalues(b, spectrum);
  return spectrum;
}

double entanglement_entropy(const Eigen::VectorXcd& psi, const Bipartition& bp, double log_base) {
  const double norm2 = psi.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-8) {
    throw ContractError(fmt::format("entanglement entropy of a state with norm^2 = {}", norm2));
  }
  std::vector<double> spectrum;
  for (const auto& block : bp.blocks) {
    const Eigen::MatrixXcd m = block_amplitudes(psi, block);
    // Nonzero spectra of M M^dag and M^dag M coincide; use the smaller one.
    if (m.rows() <= m.cols()) {
      append_hermitian_eigenvalues(m * m.adjoint(), spectrum);
    } else {
      append_hermitian_eigenvalues(m.adjoint() * m, spectrum);
    }
  }
  return entropy_from_spectrum(spectrum, log_base);
}

double entanglement_entropy(const Eigen::MatrixXcd& rho, const Bipartition& bp, double log_base) {
  const auto blocks = reduced_density_left(rho, bp);
  return entropy_from_spectrum(block_spectrum(blocks), log_base);
}

std::vector<double> jackknife_stderr(const EnsembleResult& result,
                                     const std::function<double(std::span<const double>)>& f) {
  const std::size_t G = result.chunks.size();
  if (G < 2) throw ContractError("jackknife needs at least two trajectory chunks");
  const auto S = static_cast<std::size_t>(result.populations.cols());
  const auto dim = result.populations.rows();
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(S));
  for (const auto& c : result.chunks) total += c.population_sums;
  const auto n = static_cast<double>(result.n_traj);

  std::vector<double> se(S, 0.0);
  std::vector<double> theta(G);
  Eigen::VectorXd leave(dim);
  for (std::size_t k = 0; k < S; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    for (std::size_t g = 0; g < G; ++g) {
      const double m = n - static_cast<double>(result.chunks[g].n_traj);
      leave = (total.col(col) - result.chunks[g].population_sums.col(col)) / m;
      theta[g] = f(std::span<const double>(leave.data(), static_cast<std::size_t>(dim)));
    }
    const double mean = std::accumulate(theta.begin(), theta.end(), 0.0) / static_cast<double>(G);
    double ss = 0.0;
    for (double t : theta) ss += (t - mean) * (t - mean);
    se[k] = std::sqrt(ss * static_cast<double>(G - 1) / static_cast<double>(G));
  }
  return se;
}

ObservableSeries compute_series(const EnsembleResult& result, const SectorBasis& basis,
                                const SeriesOptions& options) {
  ObservableSeries s;
  s.times = result.times;
  s.populations = result.populations;
  const std::size_t S = result.times.size();
  const auto n_sites = static_cast<Eigen::Index>(basis.n_sites());
  s.site_density.resize(n_sites, static_cast<Eigen::Index>(S));
  s.ier.resize(S);
  const bool single = basis.n_exc() == 1;
  if (single) s.ipr.emplace(S);
  if (single && options.center_site) s.imb.emplace(S);

  for (std::size_t k = 0; k < S; ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    const std::span<const double> p(result.populations.col(col).data(), basis.dim());
    s.ier[k] = ier(p);
    if (s.ipr) (*s.ipr)[k] = ipr(p, basis.n_exc());
    const auto n = site_density(p, basis);
    for (Eigen::Index i = 0; i < n_sites; ++i) s.site_density(i, col) = n[static_cast<std::size_t>(i)];
    if (s.imb) (*s.imb)[k] = imbalance(n, *options.center_site, basis.n_exc());
  }
  if (result.entropy) {
    s.svn.emplace(result.entropy->data(), result.entropy->data() + result.entropy->size());
  }

  if (result.chunks.size() >= 2) {
    s.ier_stderr = jackknife_stderr(result, [](std::span<const double> p) { return ier(p); });
    if (single) s.ipr_stderr = s.ier_stderr;
    if (result.entropy && result.chunks.front().entropy_sums.size() > 0) {
      // Trajectory-averaged entropy is linear in the chunk sums.
      const std::size_t G = result.chunks.size();
      const auto n = static_cast<double>(result.n_traj);
      std::vector<double> se(S);
      for (std::size_t k = 0; k < S; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        double total = 0.0;
        for (const auto& c : result.chunks) total += c.entropy_sums(col);
        std::vector<double> theta(G);
        double mean = 0.0;
        for (std::size_t g = 0; g < G; ++g) {
          theta[g] = (total - result.chunks[g].entropy_sums(col)) / (n - static_cast<double>(result.chunks[g].n_traj));
          mean += theta[g];
        }
        mean /= static_cast<double>(G);
        double ss = 0.0;
        for (double t : theta) ss += (t - mean) * (t - mean);
        se[k] = std::sqrt(ss * static_cast<double>(G - 1) / static_cast<double>(G));
      }
      s.svn_stderr = std::move(se);
    }
  }
  return s;
}

}  // namespace xxzcoll
