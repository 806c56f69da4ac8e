// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace prism {

struct Metrics {
  double accuracy = 0.0;
  /// Unweighted mean of per-class F1. A class absent from both predictions
  /// and labels scores 0 and still counts toward the mean.
  double macro_f1 = 0.0;
  /// (p_o - p_e) / (1 - p_e), p_e from the marginal products. Defined as 1
  /// when p_e == 1 and agreement is perfect, 0 otherwise.
  double kappa = 0.0;

  bool operator==(const Metrics&) const = default;
};

/// Row = true label, column = prediction.
std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> predictions, std::span<const int> labels,
                                                       std::size_t num_classes);

/// Throws ConfigError for empty or mismatched inputs and ShapeError for an
/// index outside [0, num_classes).
Metrics evaluate(std::span<const int> predictions, std::span<const int> labels, std::size_t num_classes);

}  // namespace prism
