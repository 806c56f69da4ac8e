// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "prism/param.hpp"
#include "prism/rng.hpp"

namespace prism {

/// Classification head over flattened features (B, in) -> logits (B, classes).
template <typename T>
class Head {
 public:
  virtual ~Head() = default;
  virtual Tensor<T> forward(const Tensor<T>& features) = 0;
  /// Accumulates parameter gradients; returns the gradient wrt the features.
  virtual Tensor<T> backward(const Tensor<T>& grad_logits) = 0;
  virtual ParamList<T> params() = 0;
  virtual std::size_t in_features() const = 0;
  virtual std::size_t num_classes() const = 0;
};

template <typename T>
class LinearHead final : public Head<T> {
 public:
  LinearHead(std::size_t in_features, std::size_t num_classes, Rng& rng);

  Tensor<T> forward(const Tensor<T>& features) override;
  Tensor<T> backward(const Tensor<T>& grad_logits) override;
  ParamList<T> params() override { return {&weight_, &bias_}; }
  std::size_t in_features() const override { return weight_.value.dim(1); }
  std::size_t num_classes() const override { return weight_.value.dim(0); }

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  Param<T> weight_;  // (classes, in)
  Param<T> bias_;    // (classes)
  Tensor<T> input_;
};

/// affine -> ReLU -> affine
template <typename T>
class MlpHead final : public Head<T> {
 public:
  MlpHead(std::size_t in_features, std::size_t hidden, std::size_t num_classes, Rng& rng);

  Tensor<T> forward(const Tensor<T>& features) override;
  Tensor<T> backward(const Tensor<T>& grad_logits) override;
  ParamList<T> params() override { return {&hidden_weight_, &hidden_bias_, &out_weight_, &out_bias_}; }
  std::size_t in_features() const override { return hidden_weight_.value.dim(1); }
  std::size_t num_classes() const override { return out_weight_.value.dim(0); }

  Param<T>& hidden_weight() { return hidden_weight_; }
  Param<T>& hidden_bias() { return hidden_bias_; }
  Param<T>& out_weight() { return out_weight_; }
  Param<T>& out_bias() { return out_bias_; }

 private:
  Param<T> hidden_weight_;  // (hidden, in)
  Param<T> hidden_bias_;    // (hidden)
  Param<T> out_weight_;     // (classes, hidden)
  Param<T> out_bias_;       // (classes)
  Tensor<T> input_;
  Tensor<T> hidden_pre_;
};

/// Row-wise softmax with max subtraction.
template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

/// (1 - eps) * onehot(label) + eps / classes
std::vector<double> smoothed_target(std::size_t label, std::size_t num_classes, double eps);

template <typename T>
struct LossResult {
  double loss;
  Tensor<T> grad_logits;  // (softmax - smoothed target) / B
};

/// Batch mean of the label-smoothed cross-entropy. Throws ConfigError for
/// eps outside [0, 1) and ShapeError for a label out of range.
template <typename T>
LossResult<T> smoothed_cross_entropy(const Tensor<T>& logits, std::span<const int> labels, double eps);

}  // namespace prism
