#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "xxzcoll/sector_basis.hpp"

namespace xxzcoll {

inline constexpr std::size_t kDefaultDenseCap = 5000;

// Per-site random fields h_i = h * (2 u_i - 1), u_i uniform in [0, 1) from the
// disorder stream of `disorder_seed`. The underlying u_i do not depend on h, so
// a scan over h at fixed seed reuses one realization rescaled.
std::vector<double> draw_disorder(int n_sites, double h, std::uint64_t disorder_seed);

// Parameters of the disordered XXZ chain (energies in units of J).
struct ChainSpec {
  int n_sites = 0;
  double J = 1.0;
  double delta = 0.0;
  double h = 0.0;
  std::uint64_t disorder_seed = 1;
  std::vector<double> fields;

  // Draws `fields` from (disorder_seed, n_sites, h).
  static ChainSpec with_disorder(int n_sites, double J, double delta, double h, std::uint64_t seed);

  // Checks |fields[i]| <= h and the field count; throws ParameterError.
  void validate() const;
};

/// Dense sector-restricted Hamiltonian
///   H = J sum_i [sx_i sx_{i+1} + sy_i sy_{i+1} + delta sz_i sz_{i+1}] + sum_i h_i sz_i
/// in Pauli convention with open boundaries: hopping elements are exactly 2J,
/// the diagonal is J*delta*sum z_i z_{i+1} + sum h_i z_i with z = +1 occupied, -1 empty.
struct SectorHamiltonian {
  std::shared_ptr<const SectorBasis> basis;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd eigenvalues;   // ascending, filled by diagonalize()
  Eigen::MatrixXd eigenvectors;  // columns, orthogonal

  bool diagonalized() const noexcept { return eigenvalues.size() == matrix.rows() && matrix.rows() > 0; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
};

SectorHamiltonian build_hamiltonian(std::shared_ptr<const SectorBasis> basis, const ChainSpec& spec,
                                    std::size_t max_dim = kDefaultDenseCap);

// Full symmetric eigendecomposition; throws NumericalError on failure.
void diagonalize(SectorHamiltonian& H);

}  // namespace xxzcoll
