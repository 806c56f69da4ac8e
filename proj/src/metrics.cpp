// SPDX-License-Identifier: Apache-2.0
#include "prism/metrics.hpp"

#include <string>

#include "prism/errors.hpp"

namespace prism {

std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> predictions, std::span<const int> labels,
                                                       std::size_t num_classes) {
  if (predictions.empty()) throw ConfigError("evaluate: empty input");
  if (predictions.size() != labels.size()) throw ConfigError("evaluate: predictions and labels differ in length");
  std::vector<std::vector<std::size_t>> cm(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i], p = predictions[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes || p < 0 || static_cast<std::size_t>(p) >= num_classes) {
      throw ShapeError("evaluate: class index out of range at position " + std::to_string(i));
    }
    ++cm[static_cast<std::size_t>(y)][static_cast<std::size_t>(p)];
  }
  return cm;
}

Metrics evaluate(std::span<const int> predictions, std::span<const int> labels, std::size_t num_classes) {
  const auto cm = confusion_matrix(predictions, labels, num_classes);
  const double n = static_cast<double>(labels.size());

  std::vector<double> row(num_classes, 0.0), col(num_classes, 0.0);
  double correct = 0.0;
  for (std::size_t i = 0; i < num_classes; ++i) {
    correct += static_cast<double>(cm[i][i]);
    for (std::size_t j = 0; j < num_classes; ++j) {
      row[i] += static_cast<double>(cm[i][j]);
      col[j] += static_cast<double>(cm[i][j]);
    }
  }

  Metrics m;
  m.accuracy = correct / n;

  double f1_sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double tp = static_cast<double>(cm[c][c]);
    // 2PR/(P+R) == 2TP / (predicted + actual); 0 when both are empty.
    const double denom = row[c] + col[c];
    f1_sum += denom > 0.0 ? 2.0 * tp / denom : 0.0;
  }
  m.macro_f1 = f1_sum / static_cast<double>(num_classes);

  double p_e = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) p_e += (row[c] / n) * (col[c] / n);
  const double p_o = m.accuracy;
  if (1.0 - p_e <= 0.0) {
    m.kappa = p_o >= 1.0 ? 1.0 : 0.0;
  } else {
    m.kappa = (p_o - p_e) / (1.0 - p_e);
  }
  return m;
}

}  // namespace prism
