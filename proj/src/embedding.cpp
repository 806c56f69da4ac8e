// SPDX-License-Identifier: Apache-2.0
#include "prism/embedding.hpp"

#include <cmath>

namespace prism {

std::size_t patch_count(std::size_t length, std::size_t patch_length) {
  if (patch_length == 0 || patch_length % 2 != 0) {
    throw ConfigError("patch length " + std::to_string(patch_length) + " must be even and positive");
  }
  if (length < patch_length) {
    throw ConfigError("sequence length " + std::to_string(length) + " is shorter than patch length " +
                      std::to_string(patch_length));
  }
  return (length - patch_length) / (patch_length / 2) + 1;
}

namespace {

// Raw kernels shared by the single-channel functions and PatchEmbedding.

template <typename T>
void depthwise_kernel(const T* h, std::size_t len, const T* v, std::size_t n_filters, std::size_t p,
                      std::size_t n_patches, T* z) {
  const std::size_t stride = p / 2;
  for (std::size_t l = 0; l < n_patches; ++l) {
    for (std::size_t f = 0; f < n_filters; ++f) {
      const T* hs = h + f * len + l * stride;
      const T* vs = v + f * p;
      T acc{0};
      for (std::size_t j = 0; j < p; ++j) acc += vs[j] * hs[j];
      z[l * n_filters + f] = acc;
    }
  }
}

template <typename T>
void pointwise_kernel(const T* z, std::size_t n_patches, std::size_t n_filters, const T* pw, const T* bias,
                      std::size_t dim, T* x) {
  for (std::size_t l = 0; l < n_patches; ++l) {
    T* xs = x + l * dim;
    for (std::size_t d = 0; d < dim; ++d) xs[d] = bias[d];
    for (std::size_t f = 0; f < n_filters; ++f) {
      const T zf = z[l * n_filters + f];
      const T* ps = pw + f * dim;
      for (std::size_t d = 0; d < dim; ++d) xs[d] += zf * ps[d];
    }
  }
}

// Normalizes one token; writes x_hat and the affine output, returns 1/sqrt(var + delta).
template <typename T>
T layer_norm_token(const T* x, std::size_t dim, const T* gain, const T* bias, double delta, T* x_hat, T* y) {
  T sum{0};
  for (std::size_t d = 0; d < dim; ++d) sum += x[d];
  const T mean = sum / static_cast<T>(dim);
  T sq{0};
  for (std::size_t d = 0; d < dim; ++d) {
    const T diff = x[d] - mean;
    x_hat[d] = diff;
    sq += diff * diff;
  }
  const T var = sq / static_cast<T>(dim);
  const T inv_std = T{1} / std::sqrt(var + static_cast<T>(delta));
  for (std::size_t d = 0; d < dim; ++d) {
    x_hat[d] *= inv_std;
    y[d] = x_hat[d] * gain[d] + bias[d];
  }
  return inv_std;
}

void require(bool ok, const std::string& op, const Shape& a, const Shape& b) {
  if (!ok) throw ShapeError(op + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

}  // namespace

template <typename T>
Tensor<T> depthwise_patch_conv(const Tensor<T>& h, const Tensor<T>& v) {
  require(h.rank() == 2 && v.rank() == 2 && h.dim(0) == v.dim(0), "depthwise_patch_conv", h.shape(), v.shape());
  const std::size_t n_filters = h.dim(0), len = h.dim(1), p = v.dim(1);
  const std::size_t n_patches = patch_count(len, p);
  Tensor<T> z({n_patches, n_filters});
  depthwise_kernel(h.data().data(), len, v.data().data(), n_filters, p, n_patches, z.data().data());
  return z;
}

template <typename T>
Tensor<T> pointwise_fuse(const Tensor<T>& z, const Tensor<T>& pointwise, const Tensor<T>& bias) {
  require(z.rank() == 2 && pointwise.rank() == 2 && z.dim(1) == pointwise.dim(0), "pointwise_fuse", z.shape(),
          pointwise.shape());
  require(bias.rank() == 1 && bias.dim(0) == pointwise.dim(1), "pointwise_fuse", pointwise.shape(), bias.shape());
  const std::size_t n_patches = z.dim(0), n_filters = z.dim(1), dim = pointwise.dim(1);
  Tensor<T> x({n_patches, dim});
  pointwise_kernel(z.data().data(), n_patches, n_filters, pointwise.data().data(), bias.data().data(), dim,
                   x.data().data());
  return x;
}

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, double delta) {
  require(x.rank() == 2 && gain.rank() == 1 && gain.dim(0) == x.dim(1), "layer_norm", x.shape(), gain.shape());
  require(bias.shape() == gain.shape(), "layer_norm", gain.shape(), bias.shape());
  const std::size_t n_tokens = x.dim(0), dim = x.dim(1);
  Tensor<T> y(x.shape());
  std::vector<T> scratch(dim);
  for (std::size_t l = 0; l < n_tokens; ++l) {
    layer_norm_token(x.data().data() + l * dim, dim, gain.data().data(), bias.data().data(), delta, scratch.data(),
                     y.data().data() + l * dim);
  }
  return y;
}

template <typename T>
Tensor<T> mean_pool(const Tensor<T>& x) {
  if (x.rank() != 2) throw ShapeError("mean_pool: expected (L_p, D), got " + shape_str(x.shape()));
  const std::size_t n_tokens = x.dim(0), dim = x.dim(1);
  Tensor<T> r({dim});
  for (std::size_t l = 0; l < n_tokens; ++l) {
    for (std::size_t d = 0; d < dim; ++d) r[d] += x.at(l, d);
  }
  for (auto& v : r.data()) v /= static_cast<T>(n_tokens);
  return r;
}

template <typename T>
PatchEmbedding<T>::PatchEmbedding(EmbeddingConfig config, Rng& rng) : config_(config) {
  if (config_.channels == 0 || config_.num_filters == 0) throw ConfigError("embedding needs channels and filters");
  if (config_.patch_length == 0 || config_.patch_length % 2 != 0) {
    throw ConfigError("patch length " + std::to_string(config_.patch_length) + " must be even and positive");
  }
  if (config_.embed_dim < 2) throw ConfigError("embed_dim must be >= 2 for LayerNorm");
  if (!(config_.ln_delta > 0.0)) throw ConfigError("ln_delta must be positive");
  if (!(config_.dropout >= 0.0 && config_.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");

  const std::size_t n_f = config_.num_filters, p = config_.patch_length, dim = config_.embed_dim;
  const double dw_bound = 1.0 / std::sqrt(static_cast<double>(p));
  const double pw_bound = 1.0 / std::sqrt(static_cast<double>(n_f));
  channels_.reserve(config_.channels);
  for (std::size_t ch = 0; ch < config_.channels; ++ch) {
    const std::string e = "embedding.ch" + std::to_string(ch);
    const std::string n = "norm.ch" + std::to_string(ch);
    auto dw = rng_uniform<T>(rng, -dw_bound, dw_bound, {n_f, p});
    auto pw = rng_uniform<T>(rng, -pw_bound, pw_bound, {n_f, dim});
    channels_.push_back(Channel{Param<T>(e + ".depthwise", std::move(dw)), Param<T>(e + ".pointwise", std::move(pw)),
                                Param<T>(e + ".bias", Tensor<T>({dim})), Param<T>(n + ".gain", Tensor<T>({dim}, T{1})),
                                Param<T>(n + ".bias", Tensor<T>({dim}))});
  }
}

template <typename T>
Tensor<T> PatchEmbedding<T>::forward(const Tensor<T>& h, bool pooled, bool training, Rng* dropout_rng) {
  if (h.rank() != 4 || h.dim(1) != config_.channels || h.dim(2) != config_.num_filters) {
    throw ShapeError("embedding forward: expected (B," + std::to_string(config_.channels) + "," +
                     std::to_string(config_.num_filters) + ",T), got " + shape_str(h.shape()));
  }
  const bool use_dropout = training && config_.dropout > 0.0;
  if (use_dropout && dropout_rng == nullptr) throw Error("embedding forward: dropout requires an rng");

  const std::size_t batch = h.dim(0), channels = h.dim(1), n_f = h.dim(2), len = h.dim(3);
  const std::size_t p = config_.patch_length, dim = config_.embed_dim;
  const std::size_t n_patches = patch_count(len, p);

  patches_ = Tensor<T>({batch, channels, n_patches, n_f});
  fused_ = Tensor<T>({batch, channels, n_patches, dim});
  x_hat_ = Tensor<T>({batch, channels, n_patches, dim});
  inv_std_ = Tensor<T>({batch, channels, n_patches});
  mask_ = use_dropout ? Tensor<T>({batch, channels, n_patches, dim}) : Tensor<T>();
  Tensor<T> tokens({batch, channels, n_patches, dim});

  const T keep_scale = use_dropout ? static_cast<T>(1.0 / (1.0 - config_.dropout)) : T{1};
  std::vector<T> act(dim);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      const auto& c = channels_[ch];
      const std::size_t bc = b * channels + ch;
      T* z = patches_.data().data() + bc * n_patches * n_f;
      T* x = fused_.data().data() + bc * n_patches * dim;
      depthwise_kernel(h.data().data() + bc * n_f * len, len, c.depthwise.value.data().data(), n_f, p, n_patches, z);
      pointwise_kernel(z, n_patches, n_f, c.pointwise.value.data().data(), c.bias.value.data().data(), dim, x);
      for (std::size_t l = 0; l < n_patches; ++l) {
        const std::size_t tok = bc * n_patches + l;
        for (std::size_t d = 0; d < dim; ++d) {
          T a = x[l * dim + d];
          if (config_.relu_after_fuse && a < T{0}) a = T{0};
          if (use_dropout) {
            const T m = dropout_rng->uniform01() < config_.dropout ? T{0} : keep_scale;
            mask_[tok * dim + d] = m;
            a *= m;
          }
          act[d] = a;
        }
        inv_std_[tok] = layer_norm_token(act.data(), dim, c.gain.value.data().data(), c.norm_bias.value.data().data(),
                                         config_.ln_delta, x_hat_.data().data() + tok * dim,
                                         tokens.data().data() + tok * dim);
      }
    }
  }

  input_ = h;
  pooled_ = pooled;
  have_forward_ = true;
  if (!pooled) return tokens;

  Tensor<T> out({batch, channels, dim});
  for (std::size_t bc = 0; bc < batch * channels; ++bc) {
    T* r = out.data().data() + bc * dim;
    for (std::size_t l = 0; l < n_patches; ++l) {
      const T* y = tokens.data().data() + (bc * n_patches + l) * dim;
      for (std::size_t d = 0; d < dim; ++d) r[d] += y[d];
    }
    for (std::size_t d = 0; d < dim; ++d) r[d] /= static_cast<T>(n_patches);
  }
  return out;
}

template <typename T>
Tensor<T> PatchEmbedding<T>::backward(const Tensor<T>& grad) {
  if (!have_forward_) throw Error("embedding backward called before forward");
  const std::size_t batch = input_.dim(0), channels = input_.dim(1), n_f = input_.dim(2), len = input_.dim(3);
  const std::size_t p = config_.patch_length, dim = config_.embed_dim, stride = p / 2;
  const std::size_t n_patches = patches_.dim(2);
  const Shape expected = pooled_ ? Shape{batch, channels, dim} : Shape{batch, channels, n_patches, dim};
  if (grad.shape() != expected) {
    throw ShapeError("embedding backward: expected grad " + shape_str(expected) + ", got " + shape_str(grad.shape()));
  }

  Tensor<T> grad_h(input_.shape());
  std::vector<T> g_y(dim), g_xhat(dim), g_x(n_patches * dim), g_z(n_patches * n_f);
  const T inv_dim = T{1} / static_cast<T>(dim);
  const T inv_patches = T{1} / static_cast<T>(n_patches);

  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      auto& c = channels_[ch];
      const std::size_t bc = b * channels + ch;
      const T* gain = c.gain.value.data().data();
      T* g_gain = c.gain.grad.data().data();
      T* g_nbias = c.norm_bias.grad.data().data();

      for (std::size_t l = 0; l < n_patches; ++l) {
        const std::size_t tok = bc * n_patches + l;
        const T* xh = x_hat_.data().data() + tok * dim;
        for (std::size_t d = 0; d < dim; ++d) {
          g_y[d] = pooled_ ? grad[bc * dim + d] * inv_patches : grad[tok * dim + d];
        }
        T mean_g{0}, mean_gx{0};
        for (std::size_t d = 0; d < dim; ++d) {
          g_gain[d] += g_y[d] * xh[d];
          g_nbias[d] += g_y[d];
          g_xhat[d] = g_y[d] * gain[d];
          mean_g += g_xhat[d];
          mean_gx += g_xhat[d] * xh[d];
        }
        mean_g *= inv_dim;
        mean_gx *= inv_dim;
        const T inv_std = inv_std_[tok];
        const T* x = fused_.data().data() + tok * dim;
        for (std::size_t d = 0; d < dim; ++d) {
          T g = inv_std * (g_xhat[d] - mean_g - xh[d] * mean_gx);
          if (!mask_.empty()) g *= mask_[tok * dim + d];
          if (config_.relu_after_fuse && x[d] <= T{0}) g = T{0};
          g_x[l * dim + d] = g;
        }
      }

      // Pointwise fusion.
      const T* z = patches_.data().data() + bc * n_patches * n_f;
      const T* pw = c.pointwise.value.data().data();
      T* g_pw = c.pointwise.grad.data().data();
      T* g_bias = c.bias.grad.data().data();
      for (std::size_t l = 0; l < n_patches; ++l) {
        const T* gx = g_x.data() + l * dim;
        for (std::size_t d = 0; d < dim; ++d) g_bias[d] += gx[d];
        for (std::size_t f = 0; f < n_f; ++f) {
          const T zf = z[l * n_f + f];
          const T* ps = pw + f * dim;
          T* gps = g_pw + f * dim;
          T acc{0};
          for (std::size_t d = 0; d < dim; ++d) {
            gps[d] += zf * gx[d];
            acc += ps[d] * gx[d];
          }
          g_z[l * n_f + f] = acc;
        }
      }

      // Depthwise patch convolution.
      const T* hs = input_.data().data() + bc * n_f * len;
      T* ghs = grad_h.data().data() + bc * n_f * len;
      const T* v = c.depthwise.value.data().data();
      T* g_v = c.depthwise.grad.data().data();
      for (std::size_t l = 0; l < n_patches; ++l) {
        for (std::size_t f = 0; f < n_f; ++f) {
          const T gz = g_z[l * n_f + f];
          const std::size_t off = f * len + l * stride;
          for (std::size_t j = 0; j < p; ++j) {
            g_v[f * p + j] += gz * hs[off + j];
            ghs[off + j] += gz * v[f * p + j];
          }
        }
      }
    }
  }
  return grad_h;
}

template <typename T>
ParamList<T> PatchEmbedding<T>::params() {
  ParamList<T> out;
  for (auto& c : channels_) {
    out.push_back(&c.depthwise);
    out.push_back(&c.pointwise);
    out.push_back(&c.bias);
  }
  for (auto& c : channels_) {
    out.push_back(&c.gain);
    out.push_back(&c.norm_bias);
  }
  return out;
}

#define PRISM_INSTANTIATE(T)                                                                          \
  template Tensor<T> depthwise_patch_conv(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> pointwise_fuse(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, double);        \
  template Tensor<T> mean_pool(const Tensor<T>&);                                                     \
  template class PatchEmbedding<T>;

PRISM_INSTANTIATE(float)
PRISM_INSTANTIATE(double)
#undef PRISM_INSTANTIATE

}  // namespace prism
