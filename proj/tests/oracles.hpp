// SPDX-License-Identifier: Apache-2.0
// Independent reference implementations used by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "prism/model.hpp"
#include "prism/rng.hpp"

namespace oracle {

using prism::Tensor;

/// Mirror + normalize from the raw stored weights, written without the
/// library helpers.
inline std::vector<double> kernel_from_weights(const std::vector<double>& stored, std::size_t k, bool symmetric,
                                               double eps) {
  std::vector<double> w(k);
  if (symmetric) {
    const std::size_t m = (k - 1) / 2;
    for (std::size_t i = 0; i < k; ++i) w[i] = stored[i >= m ? i - m : m - i];
  } else {
    w = stored;
  }
  double sq = 0.0;
  for (double v : w) sq += v * v;
  const double scale = 1.0 / (std::sqrt(sq) + eps);
  for (double& v : w) v *= scale;
  return w;
}

/// y[b,c,f,t] = sum_j w[j] * xpad[t + j], xpad = x zero-padded by m on both sides.
inline Tensor<double> bank_forward(const Tensor<double>& x, const std::vector<std::vector<double>>& kernels,
                                   std::size_t n_filters) {
  const std::size_t B = x.dim(0), C = x.dim(1), T = x.dim(2);
  Tensor<double> y({B, C, n_filters, T});
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t f = 0; f < n_filters; ++f) {
        const auto& w = kernels[c * n_filters + f];
        const std::size_t k = w.size(), m = (k - 1) / 2;
        std::vector<double> xpad(T + 2 * m, 0.0);
        for (std::size_t t = 0; t < T; ++t) xpad[t + m] = x[(b * C + c) * T + t];
        for (std::size_t t = 0; t < T; ++t) {
          double acc = 0.0;
          for (std::size_t j = 0; j < k; ++j) {
            const std::size_t s = t + j;  // index into xpad
            if (s >= m && s < T + m) acc += w[j] * xpad[s];
          }
          y[((b * C + c) * n_filters + f) * T + t] = acc;
        }
      }
  return y;
}

/// z[l,f] = sum_j v[f,j] h[f, l p/2 + j]
inline Tensor<double> depthwise(const Tensor<double>& h, const Tensor<double>& v) {
  const std::size_t F = h.dim(0), T = h.dim(1), p = v.dim(1);
  const std::size_t L = (T - p) / (p / 2) + 1;
  Tensor<double> z({L, F});
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t f = 0; f < F; ++f) {
      double acc = 0.0;
      for (std::size_t j = 0; j < p; ++j) acc += v.at(f, j) * h.at(f, l * (p / 2) + j);
      z.at(l, f) = acc;
    }
  return z;
}

/// X[l,d] = bias[d] + sum_f z[l,f] P[f,d]
inline Tensor<double> pointwise(const Tensor<double>& z, const Tensor<double>& P, const Tensor<double>& bias) {
  const std::size_t L = z.dim(0), F = z.dim(1), D = P.dim(1);
  Tensor<double> X({L, D});
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t d = 0; d < D; ++d) {
      double acc = bias[d];
      for (std::size_t f = 0; f < F; ++f) acc += z.at(l, f) * P.at(f, d);
      X.at(l, d) = acc;
    }
  return X;
}

/// Exact Mann-Whitney tails by enumerating every assignment of n_a of the
/// pooled observations to sample a.
struct EnumeratedMwu {
  double u = 0.0;
  double p_less = 0.0;
  double p_greater = 0.0;
};

inline EnumeratedMwu enumerate_mwu(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  const std::size_t n = all.size(), na = a.size();
  // U of a subset counted directly from pairwise comparisons (doubled to stay integral).
  auto u2_of = [&](const std::vector<bool>& in_a) {
    long long u2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_a[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (in_a[j]) continue;
        if (all[i] > all[j]) u2 += 2;
        else if (all[i] == all[j]) u2 += 1;
      }
    }
    return u2;
  };
  std::vector<bool> observed(n, false);
  for (std::size_t i = 0; i < na; ++i) observed[i] = true;
  const long long u_obs = u2_of(observed);

  std::vector<bool> sel(n, false);
  std::fill(sel.begin(), sel.begin() + static_cast<std::ptrdiff_t>(na), true);
  std::uint64_t total = 0, le = 0, ge = 0;
  // prev_permutation over a sorted-descending bool mask visits every subset once.
  do {
    const long long u = u2_of(sel);
    ++total;
    if (u <= u_obs) ++le;
    if (u >= u_obs) ++ge;
  } while (std::prev_permutation(sel.begin(), sel.end()));
  return {static_cast<double>(u_obs) / 2.0, static_cast<double>(le) / static_cast<double>(total),
          static_cast<double>(ge) / static_cast<double>(total)};
}

/// Forward pass of a double model with every scalar arithmetic operation
/// tallied. Kernel normalization is taken from the model (batch-independent
/// preprocessing, outside the count). Returns the logits so callers can check
/// the counted pass really is the model's forward.
struct CountedForward {
  Tensor<double> logits;
  std::uint64_t flops = 0;
};

CountedForward counted_forward(prism::Model<double>& model, const Tensor<double>& x);

/// Random valid PRISM configuration within the given bounds.
inline prism::ModelConfig random_config(prism::Rng& rng, std::size_t max_len = 64, bool allow_flatten = true) {
  prism::ModelConfig c;
  c.channels = 1 + rng.index(4);
  const std::size_t n_sizes = 1 + rng.index(3);
  std::size_t k = 1 + 2 * rng.index(3);
  c.kernel_sizes.clear();
  for (std::size_t i = 0; i < n_sizes; ++i) {
    c.kernel_sizes.push_back(k);
    k += 2 * (1 + rng.index(4));
  }
  c.filters_per_size = 1 + rng.index(3);
  c.patch_length = 2 * (1 + rng.index(4));
  c.length = c.patch_length + rng.index(max_len - c.patch_length + 1);
  c.length = std::max(c.length, c.kernel_sizes.back());
  c.embed_dim = 2 + rng.index(7);
  c.num_classes = 2 + rng.index(4);
  c.head = rng.index(2) ? prism::HeadKind::Mlp : prism::HeadKind::Linear;
  c.hidden = 1 + rng.index(8);
  c.symmetric = rng.index(4) != 0;
  c.relu_after_fuse = rng.index(4) == 0;
  c.frontend = allow_flatten && rng.index(8) == 0 ? prism::Frontend::Flatten : prism::Frontend::Prism;
  c.seed = rng.next_u64();
  return c;
}

}  // namespace oracle
