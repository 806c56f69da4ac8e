// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <span>
#include <vector>

namespace prism {

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 decimation-in-time FFT, forward sign e^{-i...}.
/// Length must be a power of two.
void fft_inplace(std::span<std::complex<double>> data);

/// Direct O(n^2) DFT of `signal` zero-padded to n_points.
std::vector<std::complex<double>> dft_direct(std::span<const double> signal, std::size_t n_points);

/// DFT of `signal` zero-padded to n_points; radix-2 when n_points is a power of
/// two, direct summation otherwise.
std::vector<std::complex<double>> dft(std::span<const double> signal, std::size_t n_points);

}  // namespace prism
