// SPDX-License-Identifier: Apache-2.0
#include "prism/complexity.hpp"

#include <numeric>

namespace prism {

ComplexityReport complexity(const ModelConfig& config, std::uint64_t batch) {
  config.validate();
  if (batch == 0) throw ConfigError("batch size must be >= 1");
  ComplexityReport r;
  r.config = config;
  r.batch = batch;

  const std::uint64_t B = batch, C = config.channels, T = config.length, K = config.num_classes;
  const std::uint64_t D = config.embed_dim, H = config.hidden, p = config.patch_length;

  std::uint64_t head_in = config.head_inputs();
  if (config.frontend == Frontend::Prism) {
    const std::uint64_t n_f = config.filters_per_size;
    const std::uint64_t F = config.num_filters();
    const std::uint64_t L = config.num_patches();
    std::uint64_t sum_k = 0, sum_half = 0;
    for (auto k : config.kernel_sizes) {
      sum_k += k;
      sum_half += (k + 1) / 2;
    }
    r.num_filters = F;
    r.num_patches = L;
    r.mean_kernel = static_cast<double>(sum_k) / static_cast<double>(config.kernel_sizes.size());

    r.filter_bank.params = C * n_f * (config.symmetric ? sum_half : sum_k);
    r.filter_bank.flops = 2 * B * C * n_f * T * sum_k;

    r.patch_embedding.params = C * (F * p + F * D + D);
    r.patch_embedding.flops = 2 * B * C * F * L * (p + D);

    r.pooling_norm.params = 2 * C * D;
    r.pooling_norm.flops = B * C * L * (7 * D + 5) + B * C * D * (L + 1);
  }

  if (config.head == HeadKind::Linear) {
    r.head.params = head_in * K + K;
    r.head.flops = 2 * B * head_in * K;
  } else {
    r.head.params = head_in * H + H + H * K + K;
    r.head.flops = 2 * B * head_in * H + 2 * B * H * K;
  }

  for (const auto* s : {&r.filter_bank, &r.patch_embedding, &r.pooling_norm, &r.head}) {
    r.total.params += s->params;
    r.total.flops += s->flops;
  }
  return r;
}

std::uint64_t count_params(const ModelConfig& config) { return complexity(config, 1).total.params; }

std::uint64_t count_flops(const ModelConfig& config, std::uint64_t batch) {
  return complexity(config, batch).total.flops;
}

nlohmann::ordered_json to_json(const ComplexityReport& r) {
  auto stage = [](const StageCost& s) {
    nlohmann::ordered_json j;
    j["params"] = s.params;
    j["flops"] = s.flops;
    return j;
  };
  nlohmann::ordered_json j;
  j["flop_convention"] = "1 MAC = 2 FLOPs; other scalar ops 1 FLOP; ReLU free; padded taps counted";
  nlohmann::ordered_json in;
  in["B"] = r.batch;
  in["C"] = r.config.channels;
  in["T"] = r.config.length;
  in["frontend"] = to_string(r.config.frontend);
  in["kernel_sizes"] = r.config.kernel_sizes;
  in["n_k"] = r.config.kernel_sizes.size();
  in["n_f"] = r.config.filters_per_size;
  in["F"] = r.num_filters;
  in["k_mean"] = r.mean_kernel;
  in["p"] = r.config.patch_length;
  in["L_p"] = r.num_patches;
  in["D"] = r.config.embed_dim;
  in["classes"] = r.config.num_classes;
  in["head"] = to_string(r.config.head);
  if (r.config.head == HeadKind::Mlp) in["hidden"] = r.config.hidden;
  in["symmetric"] = r.config.symmetric;
  j["inputs"] = in;
  nlohmann::ordered_json stages;
  stages["filter_bank"] = stage(r.filter_bank);
  stages["patch_embedding"] = stage(r.patch_embedding);
  stages["pooling_norm"] = stage(r.pooling_norm);
  stages["head"] = stage(r.head);
  j["stages"] = stages;
  j["total"] = stage(r.total);
  j["total_mflops"] = static_cast<double>(r.total.flops) / 1e6;
  return j;
}

}  // namespace prism
