// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "prism/dataset.hpp"
#include "prism/model.hpp"
#include "prism/train.hpp"

namespace prism {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

enum class Precision { F32, F64 };

/// Flat key = value run configuration. `#` starts a comment. Unknown keys
/// are rejected; every key has a documented default.
class RunConfig {
 public:
  /// Every recognised key in canonical order with its default.
  static const std::vector<ConfigKey>& keys();
  static const std::vector<std::string>& preset_names();

  RunConfig();
  /// Throws ConfigError for an unknown preset.
  static RunConfig preset(const std::string& name);

  /// Throws ConfigError for an unknown key.
  void set(const std::string& key, const std::string& value);
  /// Parses `key = value` text; errors carry the line number.
  void parse(const std::string& text, const std::string& source = "<config>");
  /// Throws IoError if the file cannot be read.
  void load_file(const std::filesystem::path& path);

  const std::string& get(const std::string& key) const;
  /// Fully resolved configuration, one key per line in canonical order.
  std::string dump() const;

  ModelConfig model() const;
  TrainConfig train() const;
  SynthSpec synth() const;
  Precision precision() const;
  std::uint64_t seed() const;

  std::string text(const std::string& key) const { return get(key); }
  double real(const std::string& key) const;
  std::uint64_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::size_t> size_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::size_t> parse_size_list(const std::string& text);
std::vector<FrequencyBand> parse_bands(const std::string& text);

nlohmann::ordered_json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace prism
