// SPDX-License-Identifier: Apache-2.0
#include "prism/heads.hpp"

#include <algorithm>
#include <cmath>

namespace prism {

namespace {

template <typename T>
Tensor<T> uniform_init(Rng& rng, std::size_t rows, std::size_t cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  return rng_uniform<T>(rng, -bound, bound, {rows, cols});
}

// out[b, o] = bias[o] + sum_i w[o, i] * x[b, i]
template <typename T>
Tensor<T> affine(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  const std::size_t batch = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  Tensor<T> out({batch, out_dim});
  for (std::size_t b = 0; b < batch; ++b) {
    const T* xs = x.data().data() + b * in;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const T* ws = w.data().data() + o * in;
      T acc = bias[o];
      for (std::size_t i = 0; i < in; ++i) acc += ws[i] * xs[i];
      out.at(b, o) = acc;
    }
  }
  return out;
}

// Accumulates weight/bias grads, returns grad wrt x.
template <typename T>
Tensor<T> affine_backward(const Tensor<T>& x, Param<T>& w, Param<T>& bias, const Tensor<T>& grad) {
  const std::size_t batch = x.dim(0), in = x.dim(1), out_dim = w.value.dim(0);
  Tensor<T> grad_x(x.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const T* xs = x.data().data() + b * in;
    T* gxs = grad_x.data().data() + b * in;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const T g = grad.at(b, o);
      bias.grad[o] += g;
      const T* ws = w.value.data().data() + o * in;
      T* gws = w.grad.data().data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        gws[i] += g * xs[i];
        gxs[i] += g * ws[i];
      }
    }
  }
  return grad_x;
}

template <typename T>
void check_features(const Tensor<T>& x, std::size_t in) {
  if (x.rank() != 2 || x.dim(1) != in) {
    throw ShapeError("head forward: expected (B," + std::to_string(in) + "), got " + shape_str(x.shape()));
  }
}

}  // namespace

template <typename T>
LinearHead<T>::LinearHead(std::size_t in_features, std::size_t num_classes, Rng& rng)
    : weight_("head.weight", uniform_init<T>(rng, num_classes, in_features)),
      bias_("head.bias", Tensor<T>({num_classes})) {}

template <typename T>
Tensor<T> LinearHead<T>::forward(const Tensor<T>& features) {
  check_features(features, in_features());
  input_ = features;
  return affine(features, weight_.value, bias_.value);
}

template <typename T>
Tensor<T> LinearHead<T>::backward(const Tensor<T>& grad_logits) {
  if (input_.empty()) throw Error("linear head backward called before forward");
  if (grad_logits.shape() != Shape{input_.dim(0), num_classes()}) {
    throw ShapeError("linear head backward: unexpected grad shape " + shape_str(grad_logits.shape()));
  }
  return affine_backward(input_, weight_, bias_, grad_logits);
}

template <typename T>
MlpHead<T>::MlpHead(std::size_t in_features, std::size_t hidden, std::size_t num_classes, Rng& rng)
    : hidden_weight_("head.hidden.weight", uniform_init<T>(rng, hidden, in_features)),
      hidden_bias_("head.hidden.bias", Tensor<T>({hidden})),
      out_weight_("head.out.weight", uniform_init<T>(rng, num_classes, hidden)),
      out_bias_("head.out.bias", Tensor<T>({num_classes})) {}

template <typename T>
Tensor<T> MlpHead<T>::forward(const Tensor<T>& features) {
  check_features(features, in_features());
  input_ = features;
  hidden_pre_ = affine(features, hidden_weight_.value, hidden_bias_.value);
  Tensor<T> act = hidden_pre_;
  for (auto& v : act.data()) v = std::max(v, T{0});
  return affine(act, out_weight_.value, out_bias_.value);
}

template <typename T>
Tensor<T> MlpHead<T>::backward(const Tensor<T>& grad_logits) {
  if (input_.empty()) throw Error("mlp head backward called before forward");
  if (grad_logits.shape() != Shape{input_.dim(0), num_classes()}) {
    throw ShapeError("mlp head backward: unexpected grad shape " + shape_str(grad_logits.shape()));
  }
  Tensor<T> act = hidden_pre_;
  for (auto& v : act.data()) v = std::max(v, T{0});
  Tensor<T> grad_act = affine_backward(act, out_weight_, out_bias_, grad_logits);
  for (std::size_t i = 0; i < grad_act.size(); ++i) {
    if (hidden_pre_[i] <= T{0}) grad_act[i] = T{0};
  }
  return affine_backward(input_, hidden_weight_, hidden_bias_, grad_act);
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw ShapeError("softmax: expected (B, classes), got " + shape_str(logits.shape()));
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  Tensor<T> out(logits.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    double top = logits.at(b, 0);
    for (std::size_t c = 1; c < k; ++c) top = std::max(top, static_cast<double>(logits.at(b, c)));
    double total = 0.0;
    std::vector<double> e(k);
    for (std::size_t c = 0; c < k; ++c) {
      e[c] = std::exp(static_cast<double>(logits.at(b, c)) - top);
      total += e[c];
    }
    for (std::size_t c = 0; c < k; ++c) out.at(b, c) = static_cast<T>(e[c] / total);
  }
  return out;
}

std::vector<double> smoothed_target(std::size_t label, std::size_t num_classes, double eps) {
  if (label >= num_classes) {
    throw ShapeError("label " + std::to_string(label) + " out of range for " + std::to_string(num_classes) +
                     " classes");
  }
  std::vector<double> y(num_classes, eps / static_cast<double>(num_classes));
  y[label] += 1.0 - eps;
  return y;
}

template <typename T>
LossResult<T> smoothed_cross_entropy(const Tensor<T>& logits, std::span<const int> labels, double eps) {
  if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError("label smoothing must lie in [0, 1)");
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("smoothed_cross_entropy: logits " + shape_str(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  LossResult<T> r{0.0, Tensor<T>(logits.shape())};
  double total = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] < 0) throw ShapeError("negative label at index " + std::to_string(b));
    const auto target = smoothed_target(static_cast<std::size_t>(labels[b]), k, eps);
    double top = logits.at(b, 0);
    for (std::size_t c = 1; c < k; ++c) top = std::max(top, static_cast<double>(logits.at(b, c)));
    double sum_exp = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum_exp += std::exp(static_cast<double>(logits.at(b, c)) - top);
    const double log_z = top + std::log(sum_exp);
    double sample = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double log_p = static_cast<double>(logits.at(b, c)) - log_z;
      sample -= target[c] * log_p;
      r.grad_logits.at(b, c) = static_cast<T>((std::exp(log_p) - target[c]) / static_cast<double>(batch));
    }
    total += sample;
  }
  r.loss = total / static_cast<double>(batch);
  return r;
}

#define PRISM_INSTANTIATE(T)                                                                    \
  template class LinearHead<T>;                                                                 \
  template class MlpHead<T>;                                                                    \
  template Tensor<T> softmax(const Tensor<T>&);                                                 \
  template LossResult<T> smoothed_cross_entropy(const Tensor<T>&, std::span<const int>, double);

PRISM_INSTANTIATE(float)
PRISM_INSTANTIATE(double)
#undef PRISM_INSTANTIATE

}  // namespace prism
