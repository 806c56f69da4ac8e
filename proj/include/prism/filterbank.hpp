// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "prism/param.hpp"
#include "prism/rng.hpp"

namespace prism {

/// Number of free taps of a palindromic kernel of odd length k: (k + 1) / 2.
/// Throws ShapeError for even k.
std::size_t half_length(std::size_t kernel_size);

/// Mirrors center-first half weights into a full palindromic kernel:
/// out[m + j] = out[m - j] = half[j], m = (k - 1) / 2.
template <typename T>
std::vector<T> expand_symmetric(std::span<const T> half, std::size_t kernel_size);

/// w / (||w||_2 + eps). The zero vector maps to itself.
template <typename T>
std::vector<T> normalize_l2(std::span<const T> w, double eps);

/// Pulls a gradient wrt normalize_l2(w) back to w (quotient rule).
template <typename T>
std::vector<T> normalize_l2_backward(std::span<const T> w, std::span<const T> grad_normalized, double eps);

/// Centered cross-correlation with zero padding of k/2 samples at both ends:
/// out[t] = sum_j w[j] * x[t + j - m]. Output has the input's length.
template <typename T>
std::vector<T> conv_same(std::span<const T> x, std::span<const T> w);

/// DFT of a kernel zero-padded to n_points.
struct FrequencyResponse {
  std::vector<std::complex<double>> spectrum;
  std::vector<double> magnitude;
};

/// Throws ShapeError when n_points < kernel length.
FrequencyResponse frequency_response(std::span<const double> kernel, std::size_t n_points);

/// max over bins of |Im(H(w) * exp(i w (k - 1) / 2))|; zero for an exactly
/// palindromic kernel up to round-off.
double linear_phase_residual(std::span<const double> kernel, std::size_t n_points);

struct FilterBankConfig {
  std::size_t channels = 1;
  std::vector<std::size_t> kernel_sizes;  // strictly increasing, odd
  std::size_t filters_per_size = 1;
  bool symmetric = true;
  double eps_norm = 1e-8;
};

/// Filter f maps to kernel_sizes[f / filters_per_size], slot f % filters_per_size.
struct FilterInfo {
  std::size_t kernel_size;
  std::size_t slot;
};

/// Per-channel bank of learnable FIR filters at several odd lengths.
///
/// In symmetric mode each filter stores only its (k + 1) / 2 center-first half
/// weights and is mirrored on every forward pass, so the expanded kernel is
/// palindromic by construction. Kernels are L2-normalized inside the forward
/// pass and gradients flow through the normalization. Channels never mix.
///
/// Input (B, C, T), output (B, C, F, T) with F = n_sizes * filters_per_size.
template <typename T>
class FilterBank {
 public:
  FilterBank(FilterBankConfig config, Rng& rng);

  FilterBank(const FilterBank&) = delete;
  FilterBank& operator=(const FilterBank&) = delete;
  FilterBank(FilterBank&&) = default;

  const FilterBankConfig& config() const { return config_; }
  std::size_t num_filters() const { return filters_.size(); }
  const std::vector<FilterInfo>& filters() const { return filters_; }

  Param<T>& weights(std::size_t channel, std::size_t filter) { return weights_[channel * num_filters() + filter]; }
  const Param<T>& weights(std::size_t channel, std::size_t filter) const {
    return weights_[channel * num_filters() + filter];
  }

  /// Full-length kernel before normalization.
  std::vector<T> kernel(std::size_t channel, std::size_t filter) const;
  /// Full-length kernel after L2 normalization, as used in forward.
  std::vector<T> normalized_kernel(std::size_t channel, std::size_t filter) const;

  Tensor<T> forward(const Tensor<T>& x);
  /// Accumulates into the weight gradients; returns the gradient wrt x.
  /// Throws Error when called before forward.
  Tensor<T> backward(const Tensor<T>& grad_out);

  ParamList<T> params();

 private:
  FilterBankConfig config_;
  std::vector<FilterInfo> filters_;
  std::vector<Param<T>> weights_;
  // Saved by forward.
  Tensor<T> input_;
  std::vector<std::vector<T>> kernels_;
  bool have_forward_ = false;
};

}  // namespace prism
