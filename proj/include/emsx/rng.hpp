#pragma once

// Portable random streams. std::mt19937_64 output is fixed by the standard;
// the distributions below are written out so that seeded runs produce the
// same numbers with every standard library.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace emsx {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Mixes a key into a seed (splitmix64 finalizer), for per-unit streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform integer on [0, n).
  std::size_t index(std::size_t n);
  /// Standard normal (Box-Muller, no caching).
  double normal();
  /// Draws an index with probability proportional to weights.
  std::size_t categorical(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace emsx
