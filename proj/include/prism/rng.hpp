// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>

#include "prism/tensor.hpp"

namespace prism {

/// xoshiro256** seeded through splitmix64.
///
/// Every derived draw (uniform, normal, index, shuffle) is defined in terms of
/// next_u64() with integer or IEEE double arithmetic only, so a given seed and
/// call sequence produces the same stream on every platform.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "xoshiro256**/splitmix64";

  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  /// Box-Muller; consumes two uniforms per draw.
  double normal(double mean, double std);
  /// Unbiased integer in [0, n).
  std::uint64_t index(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Child generator for an independent stream (e.g. per worker).
  Rng fork();

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> state_{};
};

/// Values in [lo, hi). Throws ConfigError when lo >= hi.
template <typename T>
Tensor<T> rng_uniform(Rng& rng, double lo, double hi, const Shape& shape);

/// Throws ConfigError when std < 0.
template <typename T>
Tensor<T> rng_normal(Rng& rng, double mean, double std, const Shape& shape);

}  // namespace prism
