// SPDX-License-Identifier: Apache-2.0
#include "prism/rng.hpp"

#include <cmath>
#include <numbers>

namespace prism {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
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

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double Rng::normal(double mean, double std) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + std * radius * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::index(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

Rng Rng::fork() { return Rng(next_u64()); }

template <typename T>
Tensor<T> rng_uniform(Rng& rng, double lo, double hi, const Shape& shape) {
  if (!(lo < hi)) throw ConfigError("rng_uniform: requires lo < hi");
  Tensor<T> out(shape);
  const T top = static_cast<T>(hi);
  for (auto& v : out.data()) {
    T x = static_cast<T>(rng.uniform(lo, hi));
    // Narrowing to float can round up onto hi.
    if (x >= top) x = std::nextafter(top, static_cast<T>(lo));
    v = x;
  }
  return out;
}

template <typename T>
Tensor<T> rng_normal(Rng& rng, double mean, double std, const Shape& shape) {
  if (!(std >= 0.0)) throw ConfigError("rng_normal: requires std >= 0");
  Tensor<T> out(shape);
  for (auto& v : out.data()) v = static_cast<T>(rng.normal(mean, std));
  return out;
}

template Tensor<float> rng_uniform(Rng&, double, double, const Shape&);
template Tensor<double> rng_uniform(Rng&, double, double, const Shape&);
template Tensor<float> rng_normal(Rng&, double, double, const Shape&);
template Tensor<double> rng_normal(Rng&, double, double, const Shape&);

}  // namespace prism
