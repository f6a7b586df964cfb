#pragma once

#include <cstdint>

namespace xxzcoll {

// SplitMix64 output function (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hash a tuple of words into one stream key. Order matters.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) noexcept {
  std::uint64_t k = splitmix64_mix(seed + 0x9e3779b97f4a7c15ULL);
  k = splitmix64_mix(k ^ (a + 0x632be59bd9b4e019ULL));
  k = splitmix64_mix(k ^ (b + 0x8cb92ba72f3d8dd7ULL));
  k = splitmix64_mix(k ^ (c + 0xd1b54a32d192ed03ULL));
  return k;
}

// Counter-mode SplitMix64: draw n of the stream with key k is
// mix(k + (n + 1) * golden). The stream is a pure function of (key, n), so
// any (trajectory, site) stream can be reconstructed independently of the
// order in which other streams were consumed.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  constexpr explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }
  constexpr std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Purpose tags keep disorder and noise streams disjoint for equal seeds.
enum class StreamPurpose : std::uint64_t { Disorder = 1, Collision = 2, Auxiliary = 3 };

}  // namespace xxzcoll
