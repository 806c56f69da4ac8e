// SPDX-License-Identifier: Apache-2.0
#include "prism/pipeline.hpp"

#include "prism/errors.hpp"

namespace prism {

namespace {

Dataset load_configured(const RunConfig& config, const std::string& path) {
  const auto& fmt = config.get("data_format");
  const DatasetFormat format = fmt == "auto" ? format_from_path(path) : parse_dataset_format(fmt);
  return load_dataset(path, format, config.count("num_classes"));
}

}  // namespace

Dataset source_dataset(const RunConfig& config) {
  const auto& path = config.get("data_path");
  return path.empty() ? generate_synth(config.synth()) : load_configured(config, path);
}

void check_compatible(const Dataset& data, const ModelConfig& model) {
  if (data.channels() != model.channels || data.length() != model.length) {
    throw ConfigError("dataset has C=" + std::to_string(data.channels()) + " T=" + std::to_string(data.length()) +
                      " but the model expects C=" + std::to_string(model.channels) +
                      " T=" + std::to_string(model.length));
  }
  if (data.num_classes != model.num_classes) {
    throw ConfigError("dataset has " + std::to_string(data.num_classes) + " classes but the model expects " +
                      std::to_string(model.num_classes));
  }
}

PreparedData prepare_data(const RunConfig& config) {
  const Dataset all = source_dataset(config);
  const auto& test_path = config.get("test_path");
  const double test_fraction = test_path.empty() ? config.real("test_fraction") : 0.0;
  const auto split = split_indices(all.size(), config.real("val_fraction"), test_fraction, config.seed() + 3);

  PreparedData out;
  out.train = all.subset(split.train);
  out.val = all.subset(split.val);
  out.test = test_path.empty() ? all.subset(split.test) : load_configured(config, test_path);
  const ModelConfig model = config.model();
  check_compatible(out.train, model);
  check_compatible(out.test, model);
  if (config.flag("standardize")) {
    out.standardization = Standardization::fit(out.train);
    out.standardization->apply(out.train);
    out.standardization->apply(out.val);
    out.standardization->apply(out.test);
  }
  return out;
}

}  // namespace prism
