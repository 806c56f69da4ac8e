// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "prism/dataset.hpp"
#include "prism/metrics.hpp"
#include "prism/model.hpp"
#include "prism/optim.hpp"

namespace prism {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 64;
  AdamWConfig optimizer{};
  double label_smoothing = 0.1;
  /// Seeds the per-epoch shuffle.
  std::uint64_t seed = 42;
  /// Stop after this many optimizer steps (0 = no limit).
  std::size_t max_steps = 0;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::size_t steps = 0;
  Metrics test{};
};

/// Trains with shuffled mini-batches and AdamW, evaluating validation loss
/// after every epoch. On return the model holds the parameters of the epoch
/// with the lowest validation loss and `test` is computed with them.
///
/// Throws ConfigError for an empty split and NumericError (naming the epoch)
/// when the training loss becomes non-finite.
template <typename T>
TrainReport train(Model<T>& model, const Dataset& train_set, const Dataset& val_set, const Dataset& test_set,
                  const TrainConfig& config);

template <typename T>
std::vector<int> predict(Model<T>& model, const Dataset& data, std::size_t batch_size = 256);

/// Mean smoothed cross-entropy over the whole dataset (inference mode).
template <typename T>
double mean_loss(Model<T>& model, const Dataset& data, double label_smoothing, std::size_t batch_size = 256);

/// Wall-clock seconds are emitted only when `include_timing` is set, so the
/// default serialization is reproducible byte for byte.
nlohmann::ordered_json to_json(const TrainReport& report, bool include_timing = false);
nlohmann::ordered_json to_json(const Metrics& metrics);

}  // namespace prism
