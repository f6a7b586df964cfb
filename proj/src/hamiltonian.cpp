#include "xxzcoll/hamiltonian.hpp"

#include <cmath>
#include <fmt/format.h>

#include "xxzcoll/errors.hpp"
#include "xxzcoll/rng.hpp"

namespace xxzcoll {

std::vector<double> draw_disorder(int n_sites, double h, std::uint64_t disorder_seed) {
  if (!(h >= 0.0) || !std::isfinite(h)) {
    throw ParameterError(fmt::format("disorder half-width h = {} must be finite and >= 0", h));
  }
  if (n_sites < 0) throw ParameterError("negative site count");
  CounterRng rng(derive_key(disorder_seed, static_cast<std::uint64_t>(StreamPurpose::Disorder)));
  std::vector<double> fields(static_cast<std::size_t>(n_sites));
  for (auto& f : fields) f = h * (2.0 * rng.uniform() - 1.0);
  return fields;
}

ChainSpec ChainSpec::with_disorder(int n_sites, double J, double delta, double h, std::uint64_t seed) {
  ChainSpec spec;
  spec.n_sites = n_sites;
  spec.J = J;
  spec.delta = delta;
  spec.h = h;
  spec.disorder_seed = seed;
  spec.fields = draw_disorder(n_sites, h, seed);
  return spec;
}

void ChainSpec::validate() const {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw ParameterError(fmt::format("n_sites = {} outside [1, {}]", n_sites, kMaxSites));
  }
  if (!(h >= 0.0)) throw ParameterError(fmt::format("h = {} must be >= 0", h));
  if (!std::isfinite(J) || !std::isfinite(delta)) throw ParameterError("J and delta must be finite");
  if (fields.size() != static_cast<std::size_t>(n_sites)) {
    throw ParameterError(fmt::format("{} fields for {} sites", fields.size(), n_sites));
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!(std::abs(fields[i]) <= h)) {
      throw ParameterError(fmt::format("field {} at site {} exceeds h = {}", fields[i], i + 1, h));
    }
  }
}

SectorHamiltonian build_hamiltonian(std::shared_ptr<const SectorBasis> basis, const ChainSpec& spec,
                                    std::size_t max_dim) {
  if (!basis) throw ParameterError("null basis");
  if (basis->n_sites() != spec.n_sites) {
    throw ParameterError(
        fmt::format("basis has {} sites, chain spec has {}", basis->n_sites(), spec.n_sites));
  }
  if (spec.fields.size() != static_cast<std::size_t>(spec.n_sites)) {
    throw ParameterError(fmt::format("{} fields for {} sites", spec.fields.size(), spec.n_sites));
  }
  const std::size_t dim = basis->dim();
  if (dim > max_dim) {
    throw CapacityError(fmt::format("dense Hamiltonian of dimension {} exceeds cap {}", dim, max_dim));
  }

  SectorHamiltonian H;
  H.basis = basis;
  H.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const int n = spec.n_sites;
  const auto states = basis->states();
  for (std::size_t j = 0; j < dim; ++j) {
    const Pattern p = states[j];
    double diag = 0.0;
    for (int i = 0; i < n; ++i) {
      const double zi = occupied(p, i) ? 1.0 : -1.0;
      diag += spec.fields[i] * zi;
      if (i + 1 < n) {
        const double zn = occupied(p, i + 1) ? 1.0 : -1.0;
        diag += spec.J * spec.delta * zi * zn;
        // sx sx + sy sy = 2 (s+ s- + s- s+): swaps a single excitation across the bond.
        if (zi != zn) {
          const Pattern moved = p ^ ((Pattern{1} << i) | (Pattern{1} << (i + 1)));
          const auto k = static_cast<Eigen::Index>(basis->rank(moved));
          H.matrix(k, static_cast<Eigen::Index>(j)) = 2.0 * spec.J;
        }
      }
    }
    H.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = diag;
  }
  return H;
}

void diagonalize(SectorHamiltonian& H) {
  if (H.matrix.rows() == 0) throw ParameterError("diagonalize: empty matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H.matrix, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError(fmt::format("symmetric eigensolver failed for {}x{} Hamiltonian",
                                     H.matrix.rows(), H.matrix.cols()));
  }
  H.eigenvalues = solver.eigenvalues();
  H.eigenvectors = solver.eigenvectors();
}

}  // namespace xxzcoll
