// SPDX-License-Identifier: Apache-2.0
#include "prism/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "prism/errors.hpp"

namespace prism {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw ShapeError("fft: length " + std::to_string(n) + " is not a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles computed directly rather than by recurrence to avoid drift.
        const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(k));
        const auto even = data[start + k];
        const auto odd = data[start + k + len / 2] * w;
        data[start + k] = even + odd;
        data[start + k + len / 2] = even - odd;
      }
    }
  }
}

std::vector<std::complex<double>> dft_direct(std::span<const double> signal, std::size_t n_points) {
  if (n_points < signal.size()) throw ShapeError("dft: n_points smaller than signal length");
  std::vector<std::complex<double>> out(n_points);
  for (std::size_t k = 0; k < n_points; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < signal.size(); ++n) {
      // Reduce k*n mod N first so the angle stays small and exact.
      const auto phase = static_cast<double>((k * n) % n_points);
      acc += signal[n] * std::polar(1.0, -2.0 * std::numbers::pi * phase / static_cast<double>(n_points));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<std::complex<double>> dft(std::span<const double> signal, std::size_t n_points) {
  if (n_points < signal.size()) throw ShapeError("dft: n_points smaller than signal length");
  if (!is_power_of_two(n_points)) return dft_direct(signal, n_points);
  std::vector<std::complex<double>> buf(n_points);
  for (std::size_t i = 0; i < signal.size(); ++i) buf[i] = signal[i];
  fft_inplace(buf);
  return buf;
}

}  // namespace prism
