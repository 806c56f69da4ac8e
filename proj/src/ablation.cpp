// SPDX-License-Identifier: Apache-2.0
#include "prism/ablation.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <thread>

#include "prism/config.hpp"
#include "prism/errors.hpp"

namespace prism {

std::string to_string(AblationAxis axis) {
  return axis == AblationAxis::Scales ? "scales" : "kernels_per_scale";
}

AblationAxis parse_ablation_axis(const std::string& s) {
  if (s == "scales") return AblationAxis::Scales;
  if (s == "kernels_per_scale") return AblationAxis::KernelsPerScale;
  throw ConfigError("ablation axis must be scales or kernels_per_scale, got '" + s + "'");
}

std::size_t AblationSpec::num_levels() const {
  return axis == AblationAxis::Scales ? scale_levels.size() : count_levels.size();
}

void AblationSpec::validate() const {
  if (num_levels() == 0) throw ConfigError("ablation needs at least one level");
  if (seeds == 0) throw ConfigError("ablation needs at least one seed");
  if (jobs == 0) throw ConfigError("jobs must be >= 1");
  train.validate();
}

void parse_ablation_levels(AblationSpec& spec, const std::string& text) {
  spec.scale_levels.clear();
  spec.count_levels.clear();
  if (spec.axis == AblationAxis::Scales) {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto end = text.find(';', start);
      spec.scale_levels.push_back(parse_size_list(text.substr(start, end - start)));
      if (end == std::string::npos) break;
      start = end + 1;
    }
  } else {
    spec.count_levels = parse_size_list(text);
  }
}

namespace {

std::string join(const std::vector<std::size_t>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

AblationRow run_level(const AblationSpec& spec, std::size_t level, const Dataset& train_set, const Dataset& val_set,
                      const Dataset& test_set) {
  AblationRow row;
  ModelConfig mc = spec.base;
  if (spec.axis == AblationAxis::Scales) {
    mc.kernel_sizes = spec.scale_levels[level];
    row.axis_level = join(mc.kernel_sizes, '-');
  } else {
    mc.filters_per_size = spec.count_levels[level];
    row.axis_level = std::to_string(mc.filters_per_size);
  }
  row.kernel_set = mc.kernel_sizes;
  row.filters_per_size = mc.filters_per_size;
  try {
    for (std::size_t s = 0; s < spec.seeds; ++s) {
      ModelConfig m = mc;
      m.seed = mc.seed + s;
      m.validate();
      TrainConfig t = spec.train;
      t.seed = spec.train.seed + s;
      Model<float> model(m);
      const auto report = train(model, train_set, val_set, test_set, t);
      row.seed_accuracies.push_back(report.test.accuracy);
    }
    double sum = 0.0;
    for (double a : row.seed_accuracies) sum += a;
    row.accuracy = sum / static_cast<double>(row.seed_accuracies.size());
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

std::vector<AblationRow> run_ablation(const AblationSpec& spec, const Dataset& train_set, const Dataset& val_set,
                                      const Dataset& test_set) {
  spec.validate();
  const std::size_t n = spec.num_levels();
  std::vector<AblationRow> rows(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) rows[i] = run_level(spec, i, train_set, val_set, test_set);
  };
  const std::size_t jobs = std::min(spec.jobs, n);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "axis_level,kernel_set,accuracy,delta_vs_base\n";
  char buf[64];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    out += r.axis_level + "," + join(r.kernel_set, '-') + ",";
    if (r.error) {
      out += "error,\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * r.accuracy);
    out += buf;
    out += ",";
    if (i > 0 && !rows[0].error) {
      std::snprintf(buf, sizeof buf, "%+.2f", 100.0 * (r.accuracy - rows[0].accuracy));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace prism
