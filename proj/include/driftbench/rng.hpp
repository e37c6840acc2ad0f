#pragma once

// Reproducible random streams ("driftbench-rng v1").
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
// The standard distributions are implementation-defined, so every derived
// quantity (uniform doubles, normals, bounded integers, shuffles) is computed
// here from raw engine output. Child streams are obtained by mixing a parent
// seed with a tag through SplitMix64, so independent tasks never share state.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace driftbench {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for `(parent, tag)`. Distinct tags give independent streams.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) noexcept;

/// Child seed keyed by a string (FNV-1a of the bytes, then mixed).
std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) noexcept;

/// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a(std::span<const unsigned char> bytes) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound) by rejection (no modulo bias). bound > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal (Marsaglia polar method, spare value cached).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  /// Fisher-Yates shuffle, last index first.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Identity permutation 0..n-1 shuffled by `rng`.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

}  // namespace driftbench
