// SPDX-License-Identifier: Apache-2.0
#include "prism/filterbank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prism/fft.hpp"

namespace prism {

std::size_t half_length(std::size_t kernel_size) {
  if (kernel_size % 2 == 0) {
    throw ShapeError("kernel size " + std::to_string(kernel_size) + " is not odd");
  }
  return (kernel_size + 1) / 2;
}

template <typename T>
std::vector<T> expand_symmetric(std::span<const T> half, std::size_t kernel_size) {
  const std::size_t n_half = half_length(kernel_size);
  if (half.size() != n_half) {
    throw ShapeError("expand_symmetric: " + std::to_string(half.size()) + " half weights for kernel size " +
                     std::to_string(kernel_size));
  }
  const std::size_t m = n_half - 1;
  std::vector<T> out(kernel_size);
  for (std::size_t j = 0; j <= m; ++j) {
    out[m + j] = half[j];
    out[m - j] = half[j];
  }
  return out;
}

template <typename T>
std::vector<T> normalize_l2(std::span<const T> w, double eps) {
  double sq = 0.0;
  for (auto v : w) sq += static_cast<double>(v) * static_cast<double>(v);
  const double scale = 1.0 / (std::sqrt(sq) + eps);
  std::vector<T> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<T>(static_cast<double>(w[i]) * scale);
  return out;
}

template <typename T>
std::vector<T> normalize_l2_backward(std::span<const T> w, std::span<const T> grad_normalized, double eps) {
  // d(w_a / (n + eps)) / d w_b = delta_ab / (n + eps) - w_a w_b / (n (n + eps)^2)
  double sq = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sq += static_cast<double>(w[i]) * static_cast<double>(w[i]);
    dot += static_cast<double>(w[i]) * static_cast<double>(grad_normalized[i]);
  }
  const double norm = std::sqrt(sq);
  const double denom = norm + eps;
  const double radial = norm > 0.0 ? dot / (norm * denom * denom) : 0.0;
  std::vector<T> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    out[i] = static_cast<T>(static_cast<double>(grad_normalized[i]) / denom - static_cast<double>(w[i]) * radial);
  }
  return out;
}

template <typename T>
std::vector<T> conv_same(std::span<const T> x, std::span<const T> w) {
  const std::size_t k = w.size();
  const std::size_t m = half_length(k) - 1;
  const auto len = static_cast<std::ptrdiff_t>(x.size());
  std::vector<T> out(x.size(), T{0});
  for (std::ptrdiff_t t = 0; t < len; ++t) {
    T acc{0};
    for (std::size_t j = 0; j < k; ++j) {
      const std::ptrdiff_t s = t + static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(m);
      if (s >= 0 && s < len) acc += w[j] * x[s];
    }
    out[t] = acc;
  }
  return out;
}

FrequencyResponse frequency_response(std::span<const double> kernel, std::size_t n_points) {
  if (n_points < kernel.size()) {
    throw ShapeError("frequency_response: n_points " + std::to_string(n_points) + " < kernel length " +
                     std::to_string(kernel.size()));
  }
  FrequencyResponse r;
  r.spectrum = dft(kernel, n_points);
  r.magnitude.reserve(n_points);
  for (const auto& c : r.spectrum) r.magnitude.push_back(std::abs(c));
  return r;
}

double linear_phase_residual(std::span<const double> kernel, std::size_t n_points) {
  const auto resp = frequency_response(kernel, n_points);
  const double delay = (static_cast<double>(kernel.size()) - 1.0) / 2.0;
  double worst = 0.0;
  for (std::size_t b = 0; b < n_points; ++b) {
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(b) / static_cast<double>(n_points);
    const auto rotated = resp.spectrum[b] * std::polar(1.0, omega * delay);
    worst = std::max(worst, std::abs(rotated.imag()));
  }
  return worst;
}

template <typename T>
FilterBank<T>::FilterBank(FilterBankConfig config, Rng& rng) : config_(std::move(config)) {
  if (config_.channels == 0) throw ConfigError("filter bank needs at least one channel");
  if (config_.kernel_sizes.empty()) throw ConfigError("filter bank needs at least one kernel size");
  if (config_.filters_per_size == 0) throw ConfigError("filters_per_size must be >= 1");
  if (!(config_.eps_norm > 0.0)) throw ConfigError("eps_norm must be positive");
  for (std::size_t i = 0; i < config_.kernel_sizes.size(); ++i) {
    const auto k = config_.kernel_sizes[i];
    if (k % 2 == 0) throw ConfigError("kernel size " + std::to_string(k) + " is not odd");
    if (i > 0 && k <= config_.kernel_sizes[i - 1]) throw ConfigError("kernel sizes must be strictly increasing");
  }
  for (auto k : config_.kernel_sizes) {
    for (std::size_t s = 0; s < config_.filters_per_size; ++s) filters_.push_back({k, s});
  }

  weights_.reserve(config_.channels * filters_.size());
  for (std::size_t ch = 0; ch < config_.channels; ++ch) {
    for (const auto& info : filters_) {
      const std::size_t n_half = half_length(info.kernel_size);
      const std::size_t n_free = config_.symmetric ? n_half : info.kernel_size;
      const double bound = 1.0 / std::sqrt(static_cast<double>(n_half));
      weights_.emplace_back("filterbank.ch" + std::to_string(ch) + ".k" + std::to_string(info.kernel_size) + ".f" +
                                std::to_string(info.slot),
                            rng_uniform<T>(rng, -bound, bound, {n_free}));
    }
  }
}

template <typename T>
std::vector<T> FilterBank<T>::kernel(std::size_t channel, std::size_t filter) const {
  const auto& p = weights(channel, filter);
  if (!config_.symmetric) return p.value.vec();
  return expand_symmetric<T>(p.value.data(), filters_[filter].kernel_size);
}

template <typename T>
std::vector<T> FilterBank<T>::normalized_kernel(std::size_t channel, std::size_t filter) const {
  const auto w = kernel(channel, filter);
  return normalize_l2<T>(w, config_.eps_norm);
}

template <typename T>
Tensor<T> FilterBank<T>::forward(const Tensor<T>& x) {
  if (x.rank() != 3 || x.dim(1) != config_.channels) {
    throw ShapeError("filter bank forward: expected (B," + std::to_string(config_.channels) + ",T), got " +
                     shape_str(x.shape()));
  }
  const std::size_t batch = x.dim(0), channels = x.dim(1), len = x.dim(2), n_filters = num_filters();

  kernels_.clear();
  kernels_.reserve(channels * n_filters);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    for (std::size_t f = 0; f < n_filters; ++f) kernels_.push_back(normalized_kernel(ch, f));
  }

  Tensor<T> out({batch, channels, n_filters, len});
  const auto slen = static_cast<std::ptrdiff_t>(len);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const T* xs = x.data().data() + (b * channels + ch) * len;
      for (std::size_t f = 0; f < n_filters; ++f) {
        const auto& w = kernels_[ch * n_filters + f];
        const auto k = static_cast<std::ptrdiff_t>(w.size());
        const std::ptrdiff_t m = (k - 1) / 2;
        T* ys = out.data().data() + ((b * channels + ch) * n_filters + f) * len;
        for (std::ptrdiff_t t = 0; t < slen; ++t) {
          const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, m - t);
          const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(k, slen + m - t);
          T acc{0};
          for (std::ptrdiff_t j = j_lo; j < j_hi; ++j) acc += w[j] * xs[t + j - m];
          ys[t] = acc;
        }
      }
    }
  }
  input_ = x;
  have_forward_ = true;
  return out;
}

template <typename T>
Tensor<T> FilterBank<T>::backward(const Tensor<T>& grad_out) {
  if (!have_forward_) throw Error("filter bank backward called before forward");
  const std::size_t batch = input_.dim(0), channels = input_.dim(1), len = input_.dim(2), n_filters = num_filters();
  const Shape expected{batch, channels, n_filters, len};
  if (grad_out.shape() != expected) {
    throw ShapeError("filter bank backward: expected grad " + shape_str(expected) + ", got " +
                     shape_str(grad_out.shape()));
  }

  Tensor<T> grad_x(input_.shape());
  const auto slen = static_cast<std::ptrdiff_t>(len);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    for (std::size_t f = 0; f < n_filters; ++f) {
      const auto& w = kernels_[ch * n_filters + f];
      const auto k = static_cast<std::ptrdiff_t>(w.size());
      const std::ptrdiff_t m = (k - 1) / 2;
      std::vector<T> grad_w(w.size(), T{0});
      for (std::size_t b = 0; b < batch; ++b) {
        const T* xs = input_.data().data() + (b * channels + ch) * len;
        T* gxs = grad_x.data().data() + (b * channels + ch) * len;
        const T* gs = grad_out.data().data() + ((b * channels + ch) * n_filters + f) * len;
        for (std::ptrdiff_t t = 0; t < slen; ++t) {
          const T g = gs[t];
          if (g == T{0}) continue;
          const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, m - t);
          const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(k, slen + m - t);
          for (std::ptrdiff_t j = j_lo; j < j_hi; ++j) {
            grad_w[j] += g * xs[t + j - m];
            gxs[t + j - m] += g * w[j];
          }
        }
      }

      auto& param = weights(ch, f);
      const auto raw = kernel(ch, f);
      const auto grad_raw = normalize_l2_backward<T>(raw, grad_w, config_.eps_norm);
      if (!config_.symmetric) {
        for (std::size_t j = 0; j < grad_raw.size(); ++j) param.grad[j] += grad_raw[j];
      } else {
        // Each off-center half tap feeds two mirrored positions.
        const std::size_t mm = static_cast<std::size_t>(m);
        param.grad[0] += grad_raw[mm];
        for (std::size_t j = 1; j <= mm; ++j) param.grad[j] += grad_raw[mm + j] + grad_raw[mm - j];
      }
    }
  }
  return grad_x;
}

template <typename T>
ParamList<T> FilterBank<T>::params() {
  ParamList<T> out;
  out.reserve(weights_.size());
  for (auto& p : weights_) out.push_back(&p);
  return out;
}

#define PRISM_INSTANTIATE(T)                                                                    \
  template std::vector<T> expand_symmetric(std::span<const T>, std::size_t);                    \
  template std::vector<T> normalize_l2(std::span<const T>, double);                             \
  template std::vector<T> normalize_l2_backward(std::span<const T>, std::span<const T>, double); \
  template std::vector<T> conv_same(std::span<const T>, std::span<const T>);                    \
  template class FilterBank<T>;

PRISM_INSTANTIATE(float)
PRISM_INSTANTIATE(double)
#undef PRISM_INSTANTIATE

}  // namespace prism
