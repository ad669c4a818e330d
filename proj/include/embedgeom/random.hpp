#pragma once

// Platform-independent seeded randomness. Everything here is defined in terms
// of 64-bit integer arithmetic so streams are identical on every machine.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace embedgeom {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable 64-bit hash of a seed and a byte string: FNV-1a over the seed's
/// little-endian bytes followed by the key bytes, then a splitmix64 finalizer.
inline std::uint64_t keyed_seed(std::uint64_t seed, std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  constexpr std::uint64_t prime = 0x100000001b3ULL;
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xffU;
    h *= prime;
  }
  for (unsigned char c : key) {
    h ^= c;
    h *= prime;
  }
  return splitmix64(h);
}

/// xoshiro256** seeded through splitmix64.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    for (auto& s : state_) s = splitmix64(seed);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller. Uses libm, so only bit-stable per platform;
  /// meant for synthetic data generation, never for evaluation sampling.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Floyd's algorithm: `count` distinct values from [0, population), returned in
/// generation order. The output depends only on the Rng stream.
inline std::vector<std::uint64_t> sample_without_replacement(Rng& rng, std::uint64_t population,
                                                              std::uint64_t count) {
  std::vector<std::uint64_t> out;
  out.reserve(count);
  auto floyd = [&](auto&& contains, auto&& insert) {
    for (std::uint64_t j = population - count; j < population; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      const std::uint64_t pick = contains(t) ? j : t;
      insert(pick);
      out.push_back(pick);
    }
  };
  if (count * 16 < population) {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(count * 2);
    floyd([&](std::uint64_t v) { return seen.count(v) != 0; },
          [&](std::uint64_t v) { seen.insert(v); });
  } else {
    std::vector<char> seen(population, 0);
    floyd([&](std::uint64_t v) { return seen[v] != 0; }, [&](std::uint64_t v) { seen[v] = 1; });
  }
  return out;
}

}  // namespace embedgeom
