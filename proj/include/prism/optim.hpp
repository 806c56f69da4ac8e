// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "prism/param.hpp"

namespace prism {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;

  bool operator==(const AdamWConfig&) const = default;
};

/// AdamW with decoupled weight decay: theta <- theta - lr * wd * theta, then
/// the bias-corrected Adam update. Moments are kept in double.
template <typename T>
class AdamW {
 public:
  AdamW(ParamList<T> params, AdamWConfig config);

  /// Throws NumericError naming the first parameter with a non-finite gradient.
  void step();
  std::size_t step_count() const { return step_; }
  const AdamWConfig& config() const { return config_; }

 private:
  ParamList<T> params_;
  AdamWConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t step_ = 0;
};

}  // namespace prism
