// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include <json.hpp>

#include "prism/model.hpp"

namespace prism {

struct StageCost {
  std::uint64_t params = 0;
  std::uint64_t flops = 0;
};

/// Closed-form parameter and FLOP counts per stage for batch size B.
///
/// FLOP convention: one multiply-accumulate is 2 FLOPs; every other scalar
/// add, subtract, multiply, divide or square root is 1 FLOP; ReLU and max are
/// free. Zero-padded taps of the filter bank are counted. Kernel
/// normalization is batch-independent weight preprocessing and is excluded.
///
///   filter bank     2 B C n_f T sum_m k_m
///   patch embedding 2 B C F L_p (p + D)           (bias initializes the accumulator)
///   norm + pool     B C L_p (7 D + 5) + B C D (L_p + 1)
///   head (linear)   2 B (C D) K
///   head (mlp)      2 B (C D) H + 2 B H K
struct ComplexityReport {
  ModelConfig config;
  std::uint64_t batch = 1;
  std::uint64_t num_filters = 0;
  std::uint64_t num_patches = 0;
  double mean_kernel = 0.0;
  StageCost filter_bank;
  StageCost patch_embedding;
  StageCost pooling_norm;
  StageCost head;
  StageCost total;
};

ComplexityReport complexity(const ModelConfig& config, std::uint64_t batch = 1);
std::uint64_t count_params(const ModelConfig& config);
std::uint64_t count_flops(const ModelConfig& config, std::uint64_t batch = 1);

nlohmann::ordered_json to_json(const ComplexityReport& report);

}  // namespace prism
