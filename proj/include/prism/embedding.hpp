// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "prism/param.hpp"
#include "prism/rng.hpp"

namespace prism {

/// Number of length-p patches at stride p/2 that fit in T samples:
/// floor((T - p) / (p / 2)) + 1. Trailing samples not covered by a full patch
/// are dropped. Throws ConfigError if p is odd or zero, or T < p.
std::size_t patch_count(std::size_t length, std::size_t patch_length);

/// z[l, f] = sum_j v[f, j] * h[f, l * p/2 + j]
/// h: (F, T), v: (F, p) -> z: (L_p, F). Resolution bands never mix.
template <typename T>
Tensor<T> depthwise_patch_conv(const Tensor<T>& h, const Tensor<T>& v);

/// X[l] = bias + sum_f z[l, f] * pointwise[f]
/// z: (L_p, F), pointwise: (F, D), bias: (D) -> X: (L_p, D)
template <typename T>
Tensor<T> pointwise_fuse(const Tensor<T>& z, const Tensor<T>& pointwise, const Tensor<T>& bias);

/// Per-token standardization over the D coordinates (population variance),
/// then gain * x_hat + bias. X: (L_p, D).
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, double delta);

/// Mean over the patch axis: (L_p, D) -> (D).
template <typename T>
Tensor<T> mean_pool(const Tensor<T>& x);

struct EmbeddingConfig {
  std::size_t channels = 1;
  std::size_t num_filters = 1;
  std::size_t patch_length = 8;
  std::size_t embed_dim = 16;
  double ln_delta = 1e-5;
  /// Optional ReLU and dropout between fusion and LayerNorm; both off by default.
  bool relu_after_fuse = false;
  double dropout = 0.0;
};

/// Patch tokenizer, cross-resolution fusion, per-channel LayerNorm and
/// optional mean pooling. Every parameter is owned by one input channel.
///
/// Input (B, C, F, T); output (B, C, D) when pooled, (B, C, L_p, D) otherwise.
template <typename T>
class PatchEmbedding {
 public:
  PatchEmbedding(EmbeddingConfig config, Rng& rng);

  PatchEmbedding(const PatchEmbedding&) = delete;
  PatchEmbedding& operator=(const PatchEmbedding&) = delete;
  PatchEmbedding(PatchEmbedding&&) = default;

  const EmbeddingConfig& config() const { return config_; }

  /// `dropout_rng` is required only when training with dropout > 0.
  Tensor<T> forward(const Tensor<T>& h, bool pooled, bool training = false, Rng* dropout_rng = nullptr);
  /// Accumulates parameter gradients; returns the gradient wrt h.
  Tensor<T> backward(const Tensor<T>& grad);

  Param<T>& depthwise(std::size_t ch) { return channels_[ch].depthwise; }
  Param<T>& pointwise(std::size_t ch) { return channels_[ch].pointwise; }
  Param<T>& fuse_bias(std::size_t ch) { return channels_[ch].bias; }
  Param<T>& norm_gain(std::size_t ch) { return channels_[ch].gain; }
  Param<T>& norm_bias(std::size_t ch) { return channels_[ch].norm_bias; }

  /// Embedding parameters first, then the LayerNorm affine parameters.
  ParamList<T> params();

 private:
  struct Channel {
    Param<T> depthwise;  // (F, p)
    Param<T> pointwise;  // (F, D)
    Param<T> bias;       // (D)
    Param<T> gain;       // (D)
    Param<T> norm_bias;  // (D)
  };

  EmbeddingConfig config_;
  std::vector<Channel> channels_;

  // Saved by forward.
  Tensor<T> input_;
  Tensor<T> patches_;   // z (B, C, L, F)
  Tensor<T> fused_;     // X before activation (B, C, L, D)
  Tensor<T> mask_;      // dropout scale per element, empty when unused
  Tensor<T> x_hat_;     // (B, C, L, D)
  Tensor<T> inv_std_;   // (B, C, L)
  bool pooled_ = false;
  bool have_forward_ = false;
};

}  // namespace prism
