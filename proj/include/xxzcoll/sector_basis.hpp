#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace xxzcoll {

// Occupation pattern of a chain: bit i set <=> excitation (spin up) on site i.
// Site 0 is the leftmost site; printed patterns therefore read right to left.
using Pattern = std::uint64_t;

inline constexpr int kMaxSites = 63;
inline constexpr std::size_t kDefaultBasisCap = std::size_t{1} << 24;

// binomial(n, k) for 0 <= n <= 64; 0 when k is out of range.
std::uint64_t binomial(int n, int k);

inline bool occupied(Pattern p, int site) noexcept { return ((p >> site) & 1U) != 0; }

/// Fixed-excitation-number sector of an N-site spin-1/2 chain.
///
/// States are ordered by ascending integer value of their bit pattern, which
/// for fixed popcount coincides with colexicographic order; `rank` is then the
/// combinatorial number system and costs O(q).
class SectorBasis {
 public:
  SectorBasis(int n_sites, int n_exc, std::size_t max_dim = kDefaultBasisCap);

  int n_sites() const noexcept { return n_sites_; }
  int n_exc() const noexcept { return n_exc_; }
  std::size_t dim() const noexcept { return states_.size(); }

  std::span<const Pattern> states() const noexcept { return states_; }
  Pattern unrank(std::size_t j) const;  // throws ParameterError when j >= dim
  std::size_t rank(Pattern p) const;    // throws ParameterError on wrong popcount / width

 private:
  int n_sites_;
  int n_exc_;
  std::vector<Pattern> states_;
};

/// One left-excitation-number block of a bipartition: global ordinal of the
/// state whose left part is left_patterns[r] and right part right_patterns[c]
/// is `ordinal(r, c)`.
struct BipartitionBlock {
  int left_exc = 0;
  std::vector<Pattern> left_patterns;   // subpatterns on sites [0, cut)
  std::vector<Pattern> right_patterns;  // subpatterns on sites [cut, N), shifted down
  std::vector<std::size_t> ordinals;    // row-major, rows() x cols()

  std::size_t rows() const noexcept { return left_patterns.size(); }
  std::size_t cols() const noexcept { return right_patterns.size(); }
  std::size_t size() const noexcept { return ordinals.size(); }
  std::size_t ordinal(std::size_t r, std::size_t c) const { return ordinals[r * cols() + c]; }
};

struct Bipartition {
  int cut = 0;  // number of sites in the left part
  std::vector<BipartitionBlock> blocks;
};

// Left part = sites [0, cut). Requires 0 < cut < n_sites.
Bipartition bipartition_factorization(const SectorBasis& basis, int cut);

}  // namespace xxzcoll
