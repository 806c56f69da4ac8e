// SPDX-License-Identifier: Apache-2.0
#include "prism/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace prism {

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) throw ConfigError("label_smoothing must lie in [0, 1)");
  if (!(optimizer.lr >= 0.0)) throw ConfigError("lr must be >= 0");
  if (!(optimizer.weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
}

namespace {

std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

template <typename T>
int argmax_row(const Tensor<T>& logits, std::size_t b) {
  const std::size_t k = logits.dim(1);
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (logits.at(b, c) > logits.at(b, best)) best = c;
  }
  return static_cast<int>(best);
}

}  // namespace

template <typename T>
std::vector<int> predict(Model<T>& model, const Dataset& data, std::size_t batch_size) {
  std::vector<int> out;
  out.reserve(data.size());
  const auto all = iota_indices(data.size());
  for (std::size_t start = 0; start < all.size(); start += batch_size) {
    const std::size_t stop = std::min(all.size(), start + batch_size);
    std::span<const std::size_t> idx(all.data() + start, stop - start);
    const auto logits = model.forward(data.batch<T>(idx));
    for (std::size_t b = 0; b < idx.size(); ++b) out.push_back(argmax_row(logits, b));
  }
  return out;
}

template <typename T>
double mean_loss(Model<T>& model, const Dataset& data, double label_smoothing, std::size_t batch_size) {
  double total = 0.0;
  const auto all = iota_indices(data.size());
  for (std::size_t start = 0; start < all.size(); start += batch_size) {
    const std::size_t stop = std::min(all.size(), start + batch_size);
    std::span<const std::size_t> idx(all.data() + start, stop - start);
    const auto labels = data.batch_labels(idx);
    const auto r = smoothed_cross_entropy(model.forward(data.batch<T>(idx)), labels, label_smoothing);
    total += r.loss * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(data.size());
}

template <typename T>
TrainReport train(Model<T>& model, const Dataset& train_set, const Dataset& val_set, const Dataset& test_set,
                  const TrainConfig& config) {
  config.validate();
  if (train_set.size() == 0 || val_set.size() == 0 || test_set.size() == 0) {
    throw ConfigError("train, validation and test splits must be non-empty");
  }

  AdamW<T> optimizer(model.params(), config.optimizer);
  Rng shuffle_rng(config.seed);
  auto order = iota_indices(train_set.size());

  TrainReport report;
  report.best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor<T>> best = model.snapshot();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    std::size_t seen = 0;
    bool stop = false;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      const auto labels = train_set.batch_labels(idx);

      model.zero_grad();
      const auto logits = model.forward(train_set.batch<T>(idx), true);
      auto loss = smoothed_cross_entropy(logits, labels, config.label_smoothing);
      if (!std::isfinite(loss.loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");
      }
      model.backward(loss.grad_logits);
      optimizer.step();

      loss_sum += loss.loss * static_cast<double>(idx.size());
      seen += idx.size();
      if (config.max_steps > 0 && optimizer.step_count() >= config.max_steps) {
        stop = true;
        break;
      }
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.val_loss = mean_loss(model, val_set, config.label_smoothing);
    if (!std::isfinite(rec.val_loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + " (non-finite validation loss)");
    }
    const auto val_pred = predict(model, val_set);
    rec.val_accuracy = evaluate(val_pred, val_set.labels, val_set.num_classes).accuracy;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report.epochs.push_back(rec);

    if (rec.val_loss < report.best_val_loss) {
      report.best_val_loss = rec.val_loss;
      report.best_epoch = epoch;
      best = model.snapshot();
    }
    if (stop) break;
  }

  report.steps = optimizer.step_count();
  model.restore(best);
  const auto test_pred = predict(model, test_set);
  report.test = evaluate(test_pred, test_set.labels, test_set.num_classes);
  return report;
}

nlohmann::ordered_json to_json(const Metrics& metrics) {
  nlohmann::ordered_json j;
  j["accuracy"] = metrics.accuracy;
  j["macro_f1"] = metrics.macro_f1;
  j["kappa"] = metrics.kappa;
  return j;
}

nlohmann::ordered_json to_json(const TrainReport& report, bool include_timing) {
  nlohmann::ordered_json j;
  auto epochs = nlohmann::ordered_json::array();
  for (const auto& e : report.epochs) {
    nlohmann::ordered_json row;
    row["epoch"] = e.epoch;
    row["train_loss"] = e.train_loss;
    row["val_loss"] = e.val_loss;
    row["val_accuracy"] = e.val_accuracy;
    if (include_timing) row["seconds"] = e.seconds;
    epochs.push_back(row);
  }
  j["epochs"] = epochs;
  j["best_epoch"] = report.best_epoch;
  j["best_val_loss"] = report.best_val_loss;
  j["steps"] = report.steps;
  j["test"] = to_json(report.test);
  return j;
}

#define PRISM_INSTANTIATE(T)                                                                                  \
  template TrainReport train(Model<T>&, const Dataset&, const Dataset&, const Dataset&, const TrainConfig&); \
  template std::vector<int> predict(Model<T>&, const Dataset&, std::size_t);                                 \
  template double mean_loss(Model<T>&, const Dataset&, double, std::size_t);

PRISM_INSTANTIATE(float)
PRISM_INSTANTIATE(double)
#undef PRISM_INSTANTIATE

}  // namespace prism
