// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "prism/config.hpp"
#include "prism/dataset.hpp"

namespace prism {

struct PreparedData {
  Dataset train;
  Dataset val;
  Dataset test;
  std::optional<Standardization> standardization;
};

/// The configured dataset: `data_path` if set, otherwise the synthetic task.
Dataset source_dataset(const RunConfig& config);

/// Loads or generates data, splits it with the run seed and standardizes all
/// splits with training statistics. With `test_path` set the main file is
/// split into train/val only. Throws ConfigError when the data shape does not
/// match the model config.
PreparedData prepare_data(const RunConfig& config);

/// Throws ConfigError unless the dataset's (C, T, classes) match the model.
void check_compatible(const Dataset& data, const ModelConfig& model);

}  // namespace prism
