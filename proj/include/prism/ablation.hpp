// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "prism/dataset.hpp"
#include "prism/model.hpp"
#include "prism/train.hpp"

namespace prism {

enum class AblationAxis { Scales, KernelsPerScale };
std::string to_string(AblationAxis axis);
AblationAxis parse_ablation_axis(const std::string& s);

struct AblationSpec {
  AblationAxis axis = AblationAxis::Scales;
  ModelConfig base;
  TrainConfig train;
  /// Scales axis: one kernel set per level.
  std::vector<std::vector<std::size_t>> scale_levels;
  /// Kernels-per-scale axis: one n_f per level, at base.kernel_sizes.
  std::vector<std::size_t> count_levels;
  /// Seed s in [0, seeds) offsets both the model and the shuffle seed.
  std::size_t seeds = 1;
  std::size_t jobs = 1;

  std::size_t num_levels() const;
  /// Throws ConfigError.
  void validate() const;
};

struct AblationRow {
  std::string axis_level;
  std::vector<std::size_t> kernel_set;
  std::size_t filters_per_size = 0;
  std::vector<double> seed_accuracies;  // fractions
  double accuracy = 0.0;                // mean fraction
  std::optional<std::string> error;
};

/// Parses `ablate_levels`: ';'-separated kernel sets for the scales axis,
/// ','-separated counts for kernels_per_scale.
void parse_ablation_levels(AblationSpec& spec, const std::string& text);

/// Trains one float32 model per level and seed on fixed splits. Rows come
/// back in level order regardless of `jobs`; a failing row records its error
/// and leaves the others intact.
std::vector<AblationRow> run_ablation(const AblationSpec& spec, const Dataset& train_set, const Dataset& val_set,
                                      const Dataset& test_set);

/// Header `axis_level,kernel_set,accuracy,delta_vs_base`. Accuracy is in
/// percent with two decimals; the first row is the base and has an empty
/// delta, as does any failed row.
std::string ablation_csv(const std::vector<AblationRow>& rows);

}  // namespace prism
