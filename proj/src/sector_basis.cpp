#include "xxzcoll/sector_basis.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <fmt/format.h>

#include "xxzcoll/errors.hpp"

namespace xxzcoll {
namespace {

using BinomialTable = std::array<std::array<std::uint64_t, 65>, 65>;

// Pascal's triangle; C(64, 32) ~ 1.8e18 still fits in 64 bits.
const BinomialTable& binomial_table() {
  static const BinomialTable table = [] {
    BinomialTable t{};
    for (int n = 0; n <= 64; ++n) {
      t[n][0] = 1;
      for (int k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
    }
    return t;
  }();
  return table;
}

// Gosper's hack: next larger integer with the same popcount.
Pattern next_same_popcount(Pattern v) {
  const Pattern t = v | (v - 1);
  return (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
}

std::vector<Pattern> enumerate_patterns(int width, int count) {
  std::vector<Pattern> out;
  out.reserve(binomial(width, count));
  if (count == 0) {
    out.push_back(0);
    return out;
  }
  const Pattern limit = Pattern{1} << width;
  for (Pattern p = (Pattern{1} << count) - 1; p < limit; p = next_same_popcount(p)) {
    out.push_back(p);
  }
  return out;
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (n < 0 || n > 64 || k < 0 || k > n) return 0;
  return binomial_table()[n][k];
}

SectorBasis::SectorBasis(int n_sites, int n_exc, std::size_t max_dim)
    : n_sites_(n_sites), n_exc_(n_exc) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw ParameterError(fmt::format("n_sites = {} outside [1, {}]", n_sites, kMaxSites));
  }
  if (n_exc < 0 || n_exc > n_sites) {
    throw ParameterError(fmt::format("n_exc = {} outside [0, n_sites = {}]", n_exc, n_sites));
  }
  const std::uint64_t d = binomial(n_sites, n_exc);
  if (d > max_dim) {
    throw CapacityError(
        fmt::format("sector dimension binomial({}, {}) = {} exceeds cap {}", n_sites, n_exc, d, max_dim));
  }
  states_ = enumerate_patterns(n_sites, n_exc);
}

Pattern SectorBasis::unrank(std::size_t j) const {
  if (j >= states_.size()) {
    throw ParameterError(fmt::format("ordinal {} outside sector of dimension {}", j, states_.size()));
  }
  return states_[j];
}

std::size_t SectorBasis::rank(Pattern p) const {
  if ((p >> n_sites_) != 0) {
    throw ParameterError(fmt::format("pattern {:#x} has bits beyond {} sites", p, n_sites_));
  }
  if (std::popcount(p) != n_exc_) {
    throw ParameterError(
        fmt::format("pattern {:#x} has {} excitations, sector has {}", p, std::popcount(p), n_exc_));
  }
  std::size_t r = 0;
  int l = 0;
  while (p != 0) {
    const int pos = std::countr_zero(p);
    ++l;
    r += binomial(pos, l);
    p &= p - 1;
  }
  return r;
}

Bipartition bipartition_factorization(const SectorBasis& basis, int cut) {
  const int n = basis.n_sites();
  const int q = basis.n_exc();
  if (cut <= 0 || cut >= n) {
    throw ParameterError(fmt::format("bipartition cut {} outside (0, {})", cut, n));
  }
  Bipartition bp;
  bp.cut = cut;
  const int k_lo = std::max(0, q - (n - cut));
  const int k_hi = std::min(q, cut);
  for (int k = k_lo; k <= k_hi; ++k) {
    BipartitionBlock block;
    block.left_exc = k;
    block.left_patterns = enumerate_patterns(cut, k);
    block.right_patterns = enumerate_patterns(n - cut, q - k);
    block.ordinals.reserve(block.rows() * block.cols());
    for (Pattern left : block.left_patterns) {
      for (Pattern right : block.right_patterns) {
        block.ordinals.push_back(basis.rank(left | (right << cut)));
      }
    }
    bp.blocks.push_back(std::move(block));
  }
  return bp;
}

}  // namespace xxzcoll
