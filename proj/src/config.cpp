// SPDX-License-Identifier: Apache-2.0
#include "prism/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace prism {

const std::vector<ConfigKey>& RunConfig::keys() {
  static const std::vector<ConfigKey> k = {
      // model
      {"channels", "3", "input channels C"},
      {"length", "128", "sequence length T"},
      {"kernel_sizes", "11,21,51,71", "odd filter lengths, strictly increasing"},
      {"filters_per_size", "2", "filters per kernel size n_f"},
      {"patch_length", "8", "patch length p (even; stride p/2)"},
      {"embed_dim", "128", "embedding dimension D"},
      {"num_classes", "4", "number of classes"},
      {"head", "linear", "classification head: linear | mlp"},
      {"hidden", "128", "MLP hidden width"},
      {"symmetric", "true", "palindromic half-weight filters (false = free full-length filters)"},
      {"eps_norm", "1e-8", "filter L2-normalization epsilon"},
      {"ln_delta", "1e-5", "LayerNorm variance stabilizer"},
      {"relu_after_fuse", "false", "ReLU between pointwise fusion and LayerNorm"},
      {"dropout", "0", "dropout rate between fusion and LayerNorm (training only)"},
      {"frontend", "prism", "prism | flatten (head on the raw flattened input)"},
      {"share_embedding_across_channels", "false", "reserved; must be false"},
      // training
      {"epochs", "100", "training epochs"},
      {"batch_size", "64", "mini-batch size"},
      {"lr", "1e-3", "AdamW learning rate"},
      {"weight_decay", "1e-4", "AdamW decoupled weight decay"},
      {"beta1", "0.9", "AdamW beta1"},
      {"beta2", "0.999", "AdamW beta2"},
      {"adam_eps", "1e-8", "AdamW epsilon"},
      {"label_smoothing", "0.1", "label smoothing epsilon"},
      {"max_steps", "0", "stop after this many optimizer steps (0 = no limit)"},
      // run
      {"seed", "42", "master seed (env PRISM_SEED overrides)"},
      {"precision", "f32", "f32 | f64 arithmetic for training and inference"},
      {"data_path", "", "dataset file (empty = generate the synthetic task)"},
      {"test_path", "", "separate test dataset file (empty = split from data)"},
      {"data_format", "auto", "auto | csv | bin"},
      {"val_fraction", "0.2", "validation share of all samples"},
      {"test_fraction", "0.2", "test share of all samples when no test_path is given"},
      {"standardize", "true", "per-channel standardization with training statistics"},
      // synthetic task
      {"synth_bands", "0.02-0.06,0.08-0.14,0.18-0.26,0.30-0.42", "class frequency bands in cycles/sample"},
      {"synth_per_class", "200", "samples per class"},
      {"synth_sinusoids", "1", "sinusoids per channel"},
      {"synth_noise_std", "0.5", "additive Gaussian noise std"},
      {"synth_amplitude_lo", "0.5", "minimum sinusoid amplitude"},
      {"synth_amplitude_hi", "1.5", "maximum sinusoid amplitude"},
      {"synth_allow_overlap", "false", "permit overlapping bands"},
      {"synth_format", "bin", "file format written by synth: csv | bin"},
      // analysis
      {"fft_points", "256", "FFT length for spectral analysis (power of two)"},
      {"complexity_batch", "1", "batch size B for FLOP counts"},
      {"ablate_axis", "scales", "scales | kernels_per_scale"},
      {"ablate_levels", "15;15,31;15,31,51;15,31,51,71",
       "scales: ';'-separated kernel sets; kernels_per_scale: ','-separated counts"},
      {"ablate_seeds", "1", "seeds averaged per ablation level"},
      {"jobs", "1", "parallel ablation rows"},
      {"gradcheck_seeds", "3", "seeds for gradient certification"},
      {"gradcheck_step", "1e-5", "finite-difference step"},
      {"gradcheck_tolerance", "1e-4", "maximum relative error"},
  };
  return k;
}

const std::vector<std::string>& RunConfig::preset_names() {
  static const std::vector<std::string> names = {"default", "isruc-small", "tiny"};
  return names;
}

RunConfig::RunConfig() {
  for (const auto& k : keys()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig c;
  if (name == "default") return c;
  if (name == "isruc-small") {
    c.set("channels", "9");
    c.set("length", "3000");
    c.set("kernel_sizes", "7,15,25");
    c.set("embed_dim", "26");
    c.set("patch_length", "8");
    c.set("filters_per_size", "2");
    c.set("num_classes", "5");
    c.set("synth_bands", "0.01-0.03,0.05-0.08,0.11-0.15,0.19-0.25,0.30-0.40");
    return c;
  }
  if (name == "tiny") {
    c.set("channels", "2");
    c.set("length", "32");
    c.set("kernel_sizes", "3,5");
    c.set("filters_per_size", "2");
    c.set("patch_length", "4");
    c.set("embed_dim", "6");
    c.set("num_classes", "3");
    c.set("synth_bands", "0.05-0.12,0.18-0.28,0.32-0.45");
    c.set("synth_per_class", "20");
    c.set("epochs", "3");
    c.set("batch_size", "8");
    return c;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

void RunConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void RunConfig::parse(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(n) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  parse(ss.str(), path.string());
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& k : keys()) out += k.name + " = " + values_.at(k.name) + "\n";
  return out;
}

double RunConfig::real(const std::string& key) const {
  const auto& s = get(key);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not a number");
  }
  return v;
}

std::uint64_t RunConfig::count(const std::string& key) const {
  const auto& s = get(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("key '" + key + "': '" + s + "' is not a non-negative integer");
  }
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const auto& s = get(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("key '" + key + "': '" + s + "' is not a boolean");
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("'" + text + "' is not a comma-separated list of integers");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::vector<std::size_t> RunConfig::size_list(const std::string& key) const {
  try {
    return parse_size_list(get(key));
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

std::vector<FrequencyBand> parse_bands(const std::string& text) {
  std::vector<FrequencyBand> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto dash = item.find('-');
    double lo = 0.0, hi = 0.0;
    bool ok = dash != std::string::npos;
    if (ok) {
      const auto a = std::from_chars(item.data(), item.data() + dash, lo);
      const auto b = std::from_chars(item.data() + dash + 1, item.data() + item.size(), hi);
      ok = a.ec == std::errc() && a.ptr == item.data() + dash && b.ec == std::errc() &&
           b.ptr == item.data() + item.size();
    }
    if (!ok) throw ConfigError("band '" + item + "' is not lo-hi");
    out.push_back({lo, hi});
  }
  return out;
}

ModelConfig RunConfig::model() const {
  ModelConfig m;
  m.channels = count("channels");
  m.length = count("length");
  m.kernel_sizes = size_list("kernel_sizes");
  m.filters_per_size = count("filters_per_size");
  m.patch_length = count("patch_length");
  m.embed_dim = count("embed_dim");
  m.num_classes = count("num_classes");
  m.head = parse_head_kind(get("head"));
  m.hidden = count("hidden");
  m.symmetric = flag("symmetric");
  m.eps_norm = real("eps_norm");
  m.ln_delta = real("ln_delta");
  m.relu_after_fuse = flag("relu_after_fuse");
  m.dropout = real("dropout");
  m.frontend = parse_frontend(get("frontend"));
  m.share_embedding_across_channels = flag("share_embedding_across_channels");
  m.seed = seed();
  m.validate();
  return m;
}

TrainConfig RunConfig::train() const {
  TrainConfig t;
  t.epochs = count("epochs");
  t.batch_size = count("batch_size");
  t.optimizer.lr = real("lr");
  t.optimizer.weight_decay = real("weight_decay");
  t.optimizer.beta1 = real("beta1");
  t.optimizer.beta2 = real("beta2");
  t.optimizer.eps = real("adam_eps");
  t.label_smoothing = real("label_smoothing");
  t.max_steps = count("max_steps");
  t.seed = seed() + 1;
  t.validate();
  return t;
}

SynthSpec RunConfig::synth() const {
  SynthSpec s;
  s.bands = parse_bands(get("synth_bands"));
  s.channels = count("channels");
  s.length = count("length");
  s.per_class = count("synth_per_class");
  s.sinusoids = count("synth_sinusoids");
  s.noise_std = real("synth_noise_std");
  s.amplitude_lo = real("synth_amplitude_lo");
  s.amplitude_hi = real("synth_amplitude_hi");
  s.allow_overlap = flag("synth_allow_overlap");
  s.seed = seed() + 2;
  s.validate();
  return s;
}

Precision RunConfig::precision() const {
  const auto& p = get("precision");
  if (p == "f32") return Precision::F32;
  if (p == "f64") return Precision::F64;
  throw ConfigError("precision must be f32 or f64, got '" + p + "'");
}

std::uint64_t RunConfig::seed() const { return count("seed"); }

nlohmann::ordered_json to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["channels"] = c.channels;
  j["length"] = c.length;
  j["kernel_sizes"] = c.kernel_sizes;
  j["filters_per_size"] = c.filters_per_size;
  j["patch_length"] = c.patch_length;
  j["embed_dim"] = c.embed_dim;
  j["num_classes"] = c.num_classes;
  j["head"] = to_string(c.head);
  j["hidden"] = c.hidden;
  j["symmetric"] = c.symmetric;
  j["eps_norm"] = c.eps_norm;
  j["ln_delta"] = c.ln_delta;
  j["relu_after_fuse"] = c.relu_after_fuse;
  j["dropout"] = c.dropout;
  j["frontend"] = to_string(c.frontend);
  j["share_embedding_across_channels"] = c.share_embedding_across_channels;
  j["seed"] = c.seed;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.channels = j.at("channels").get<std::size_t>();
    c.length = j.at("length").get<std::size_t>();
    c.kernel_sizes = j.at("kernel_sizes").get<std::vector<std::size_t>>();
    c.filters_per_size = j.at("filters_per_size").get<std::size_t>();
    c.patch_length = j.at("patch_length").get<std::size_t>();
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.head = parse_head_kind(j.at("head").get<std::string>());
    c.hidden = j.at("hidden").get<std::size_t>();
    c.symmetric = j.at("symmetric").get<bool>();
    c.eps_norm = j.at("eps_norm").get<double>();
    c.ln_delta = j.at("ln_delta").get<double>();
    c.relu_after_fuse = j.at("relu_after_fuse").get<bool>();
    c.dropout = j.at("dropout").get<double>();
    c.frontend = parse_frontend(j.at("frontend").get<std::string>());
    c.share_embedding_across_channels = j.at("share_embedding_across_channels").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed model config: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lr"] = c.optimizer.lr;
  j["weight_decay"] = c.optimizer.weight_decay;
  j["beta1"] = c.optimizer.beta1;
  j["beta2"] = c.optimizer.beta2;
  j["adam_eps"] = c.optimizer.eps;
  j["label_smoothing"] = c.label_smoothing;
  j["max_steps"] = c.max_steps;
  j["seed"] = c.seed;
  return j;
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  try {
    TrainConfig c;
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.optimizer.lr = j.at("lr").get<double>();
    c.optimizer.weight_decay = j.at("weight_decay").get<double>();
    c.optimizer.beta1 = j.at("beta1").get<double>();
    c.optimizer.beta2 = j.at("beta2").get<double>();
    c.optimizer.eps = j.at("adam_eps").get<double>();
    c.label_smoothing = j.at("label_smoothing").get<double>();
    c.max_steps = j.at("max_steps").get<std::size_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed train config: ") + e.what());
  }
}

}  // namespace prism
