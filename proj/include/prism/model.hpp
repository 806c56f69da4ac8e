// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "prism/embedding.hpp"
#include "prism/filterbank.hpp"
#include "prism/heads.hpp"

namespace prism {

enum class HeadKind { Linear, Mlp };
/// Prism: filter bank + patch embedding + pooled head. Flatten: head directly
/// on the flattened raw input (baseline).
enum class Frontend { Prism, Flatten };

std::string to_string(HeadKind kind);
std::string to_string(Frontend frontend);
HeadKind parse_head_kind(const std::string& s);
Frontend parse_frontend(const std::string& s);

struct ModelConfig {
  std::size_t channels = 3;
  std::size_t length = 128;
  std::vector<std::size_t> kernel_sizes{11, 21, 51, 71};
  std::size_t filters_per_size = 2;
  std::size_t patch_length = 8;
  std::size_t embed_dim = 128;
  std::size_t num_classes = 4;
  HeadKind head = HeadKind::Linear;
  std::size_t hidden = 128;
  bool symmetric = true;
  double eps_norm = 1e-8;
  double ln_delta = 1e-5;
  bool relu_after_fuse = false;
  double dropout = 0.0;
  Frontend frontend = Frontend::Prism;
  /// Reserved; sharing embedding weights across channels is not implemented.
  bool share_embedding_across_channels = false;
  std::uint64_t seed = 42;

  std::size_t num_filters() const { return kernel_sizes.size() * filters_per_size; }
  std::size_t num_patches() const;
  std::size_t head_inputs() const;
  /// Throws ConfigError describing the first invalid field.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// PRISM front-end plus classification head.
template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& config);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }

  /// (B, C, T) -> logits (B, classes).
  Tensor<T> forward(const Tensor<T>& x, bool training = false);
  /// Accumulates gradients of every parameter from dLoss/dlogits.
  void backward(const Tensor<T>& grad_logits);

  /// Front-end output only: (B, C, D) pooled or (B, C, L_p, D) unpooled.
  Tensor<T> features(const Tensor<T>& x, bool pooled);

  /// Fixed order: filter bank, embedding, LayerNorm, head.
  ParamList<T> params();
  void zero_grad();

  std::vector<Tensor<T>> snapshot();
  void restore(const std::vector<Tensor<T>>& values);

  FilterBank<T>* filter_bank() { return bank_ ? &*bank_ : nullptr; }
  const FilterBank<T>* filter_bank() const { return bank_ ? &*bank_ : nullptr; }
  PatchEmbedding<T>* embedding() { return embedding_ ? &*embedding_ : nullptr; }
  Head<T>& head() { return *head_; }

 private:
  ModelConfig config_;
  Rng dropout_rng_;
  std::optional<FilterBank<T>> bank_;
  std::optional<PatchEmbedding<T>> embedding_;
  std::unique_ptr<Head<T>> head_;
  Shape feature_shape_;
};

}  // namespace prism
