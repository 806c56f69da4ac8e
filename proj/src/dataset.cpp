// SPDX-License-Identifier: Apache-2.0
#include "prism/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "prism/errors.hpp"
#include "prism/rng.hpp"

namespace prism {

void Dataset::validate() const {
  if (labels.empty()) throw ConfigError("dataset is empty");
  if (samples.rank() != 3 || samples.dim(0) != labels.size()) {
    throw ConfigError("dataset samples " + shape_str(samples.shape()) + " do not match " +
                      std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw ConfigError("label " + std::to_string(labels[i]) + " of sample " + std::to_string(i) +
                        " out of range for " + std::to_string(num_classes) + " classes");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.samples = batch<float>(indices);
  out.labels = batch_labels(indices);
  out.num_classes = num_classes;
  out.channel_names = channel_names;
  return out;
}

template <typename T>
Tensor<T> Dataset::batch(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw ConfigError("empty batch");
  const std::size_t row = channels() * length();
  Tensor<T> out({indices.size(), channels(), length()});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) throw ShapeError("sample index " + std::to_string(indices[i]) + " out of range");
    const float* src = samples.data().data() + indices[i] * row;
    std::copy(src, src + row, out.data().data() + i * row);
  }
  return out;
}

template Tensor<float> Dataset::batch(std::span<const std::size_t>) const;
template Tensor<double> Dataset::batch(std::span<const std::size_t>) const;

std::vector<int> Dataset::batch_labels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(labels.at(i));
  return out;
}

void SynthSpec::validate() const {
  if (bands.size() < 2) throw ConfigError("synth needs at least two class bands");
  for (std::size_t c = 0; c < bands.size(); ++c) {
    const auto& b = bands[c];
    if (!(b.lo > 0.0 && b.lo < b.hi && b.hi < 0.5)) {
      throw ConfigError("invalid band " + std::to_string(c) + ": need 0 < lo < hi < 0.5");
    }
    if (!allow_overlap) {
      for (std::size_t d = 0; d < c; ++d) {
        if (b.lo < bands[d].hi && bands[d].lo < b.hi) {
          throw ConfigError("bands " + std::to_string(d) + " and " + std::to_string(c) + " overlap");
        }
      }
    }
  }
  if (channels == 0 || length == 0 || per_class == 0 || sinusoids == 0) {
    throw ConfigError("synth channels, length, per_class and sinusoids must be >= 1");
  }
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (!(amplitude_lo > 0.0 && amplitude_lo <= amplitude_hi)) throw ConfigError("need 0 < amplitude_lo <= amplitude_hi");
}

Dataset generate_synth(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.bands.size() * spec.per_class;
  Dataset data;
  data.num_classes = spec.bands.size();
  data.samples = Tensor<float>({n, spec.channels, spec.length});
  data.labels.reserve(n);
  Rng rng(spec.seed);
  std::vector<double> signal(spec.length);
  std::size_t idx = 0;
  for (std::size_t c = 0; c < spec.bands.size(); ++c) {
    const auto band = spec.bands[c];
    for (std::size_t s = 0; s < spec.per_class; ++s, ++idx) {
      data.labels.push_back(static_cast<int>(c));
      for (std::size_t ch = 0; ch < spec.channels; ++ch) {
        std::fill(signal.begin(), signal.end(), 0.0);
        for (std::size_t k = 0; k < spec.sinusoids; ++k) {
          const double freq = rng.uniform(band.lo, band.hi);
          const double amp =
              spec.amplitude_hi > spec.amplitude_lo ? rng.uniform(spec.amplitude_lo, spec.amplitude_hi) : spec.amplitude_lo;
          const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
          for (std::size_t t = 0; t < spec.length; ++t) {
            signal[t] += amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) + phase);
          }
        }
        float* out = data.samples.data().data() + (idx * spec.channels + ch) * spec.length;
        for (std::size_t t = 0; t < spec.length; ++t) {
          const double noise = spec.noise_std > 0.0 ? rng.normal(0.0, spec.noise_std) : 0.0;
          out[t] = static_cast<float>(signal[t] + noise);
        }
      }
    }
  }
  return data;
}

Standardization Standardization::fit(const Dataset& train) {
  const std::size_t n = train.size(), channels = train.channels(), len = train.length();
  Standardization s;
  s.mean.assign(channels, 0.0);
  s.std.assign(channels, 0.0);
  const double count = static_cast<double>(n * len);
  for (std::size_t ch = 0; ch < channels; ++ch) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const float* x = train.samples.data().data() + (i * channels + ch) * len;
      for (std::size_t t = 0; t < len; ++t) sum += x[t];
    }
    const double mean = sum / count;
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const float* x = train.samples.data().data() + (i * channels + ch) * len;
      for (std::size_t t = 0; t < len; ++t) sq += (x[t] - mean) * (x[t] - mean);
    }
    s.mean[ch] = mean;
    s.std[ch] = std::sqrt(sq / count);
  }
  return s;
}

void Standardization::apply(Dataset& data) const {
  const std::size_t n = data.size(), channels = data.channels(), len = data.length();
  if (channels != mean.size()) throw ShapeError("standardization fitted for a different channel count");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < channels; ++ch) {
      float* x = data.samples.data().data() + (i * channels + ch) * len;
      const double scale = 1.0 / (std[ch] + 1e-8);
      for (std::size_t t = 0; t < len; ++t) x[t] = static_cast<float>((x[t] - mean[ch]) * scale);
    }
  }
}

SplitIndices split_indices(std::size_t n, double val_fraction, double test_fraction, std::uint64_t seed) {
  if (!(val_fraction >= 0.0 && test_fraction >= 0.0 && val_fraction + test_fraction < 1.0)) {
    throw ConfigError("split fractions must be >= 0 and sum below 1");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(val_fraction * static_cast<double>(n)));
  SplitIndices s;
  s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
               order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

DatasetFormat parse_dataset_format(const std::string& s) {
  if (s == "csv") return DatasetFormat::Csv;
  if (s == "bin" || s == "binary" || s == "raw-binary") return DatasetFormat::Binary;
  throw ConfigError("unknown dataset format '" + s + "' (expected csv or bin)");
}

DatasetFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? DatasetFormat::Csv : DatasetFormat::Binary;
}

void append_f32_le(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFFu));
}

float read_f32_le(const unsigned char* bytes) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename N>
bool parse_number(std::string_view s, N& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

std::string format_float(float v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

Dataset load_csv(const std::filesystem::path& path, std::size_t num_classes) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  std::size_t length = 0;

  struct Sample {
    int label;
    std::map<std::size_t, std::vector<float>> channels;
    std::size_t first_row;
  };
  std::vector<Sample> samples;
  std::map<std::string, std::size_t> index_of;

  while (std::getline(in, line)) {
    ++row;
    const auto view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    const std::string where = path.string() + ": row " + std::to_string(row);
    long long channel = 0, label = 0;
    if (fields.size() < 4 || !parse_number(fields[1], channel) || !parse_number(fields[2], label)) {
      if (row == 1 && !samples.size()) continue;  // header
      throw IoError(where + ": expected sample_id,channel_id,label,v_0,... with at least one value");
    }
    if (channel < 0) throw IoError(where + ": negative channel id");
    if (label < 0 || (num_classes > 0 && static_cast<std::size_t>(label) >= num_classes)) {
      throw IoError(where + ": label " + std::to_string(label) + " out of range");
    }
    const std::size_t n_values = fields.size() - 3;
    if (length == 0) length = n_values;
    if (n_values != length) {
      throw IoError(where + ": row has " + std::to_string(n_values) + " values, expected " + std::to_string(length));
    }
    std::vector<float> values(n_values);
    for (std::size_t t = 0; t < n_values; ++t) {
      if (!parse_number(fields[3 + t], values[t])) {
        throw IoError(where + ": cannot parse value " + std::to_string(t));
      }
    }
    const std::string id(trim(fields[0]));
    auto [it, inserted] = index_of.emplace(id, samples.size());
    if (inserted) samples.push_back(Sample{static_cast<int>(label), {}, row});
    auto& s = samples[it->second];
    if (s.label != label) throw IoError(where + ": label differs from earlier rows of sample " + id);
    if (!s.channels.emplace(static_cast<std::size_t>(channel), std::move(values)).second) {
      throw IoError(where + ": duplicate channel " + std::to_string(channel) + " for sample " + id);
    }
  }
  if (samples.empty()) throw IoError(path.string() + ": no data rows");

  const std::size_t channels = samples.front().channels.size();
  Dataset data;
  data.samples = Tensor<float>({samples.size(), channels, length});
  int max_label = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string where = path.string() + ": row " + std::to_string(s.first_row);
    if (s.channels.size() != channels || s.channels.rbegin()->first != channels - 1) {
      throw IoError(where + ": sample must have channels 0.." + std::to_string(channels - 1));
    }
    for (const auto& [ch, values] : s.channels) {
      std::copy(values.begin(), values.end(), data.samples.data().data() + (i * channels + ch) * length);
    }
    data.labels.push_back(s.label);
    max_label = std::max(max_label, s.label);
  }
  data.num_classes = num_classes > 0 ? num_classes : static_cast<std::size_t>(max_label) + 1;
  return data;
}

Dataset load_binary(const std::filesystem::path& path, std::size_t num_classes) {
  const std::string bytes = read_file(path);
  const auto newline = bytes.find('\n');
  if (newline == std::string::npos) throw IoError(path.string() + ": missing JSON header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": malformed header: " + e.what());
  }
  Dataset data;
  std::size_t n = 0, channels = 0, len = 0;
  try {
    n = header.at("N").get<std::size_t>();
    channels = header.at("C").get<std::size_t>();
    len = header.at("T").get<std::size_t>();
    data.num_classes = header.at("num_classes").get<std::size_t>();
    data.labels = header.at("labels").get<std::vector<int>>();
    if (header.contains("channel_names")) data.channel_names = header["channel_names"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": malformed header: " + e.what());
  }
  if (n == 0 || channels == 0 || len == 0) throw IoError(path.string() + ": header dimensions must be positive");
  if (data.labels.size() != n) throw IoError(path.string() + ": header lists " + std::to_string(data.labels.size()) +
                                             " labels for N=" + std::to_string(n));
  if (num_classes > 0 && num_classes != data.num_classes) {
    throw IoError(path.string() + ": file declares " + std::to_string(data.num_classes) + " classes, expected " +
                  std::to_string(num_classes));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (data.labels[i] < 0 || static_cast<std::size_t>(data.labels[i]) >= data.num_classes) {
      throw IoError(path.string() + ": label of sample " + std::to_string(i) + " out of range");
    }
  }
  const std::size_t count = n * channels * len;
  const std::size_t payload = bytes.size() - newline - 1;
  if (payload != 4 * count) {
    throw IoError(path.string() + ": payload at offset " + std::to_string(newline + 1) + " has " +
                  std::to_string(payload) + " bytes, expected " + std::to_string(4 * count));
  }
  data.samples = Tensor<float>({n, channels, len});
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + newline + 1;
  for (std::size_t i = 0; i < count; ++i) data.samples[i] = read_f32_le(p + 4 * i);
  return data;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format, std::size_t num_classes) {
  Dataset data = format == DatasetFormat::Csv ? load_csv(path, num_classes) : load_binary(path, num_classes);
  data.validate();
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path, DatasetFormat format) {
  data.validate();
  const std::size_t n = data.size(), channels = data.channels(), len = data.length();
  std::string out;
  if (format == DatasetFormat::Csv) {
    out += "sample_id,channel_id,label";
    for (std::size_t t = 0; t < len; ++t) out += ",v_" + std::to_string(t);
    out += '\n';
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        out += std::to_string(i) + ',' + std::to_string(ch) + ',' + std::to_string(data.labels[i]);
        const float* x = data.samples.data().data() + (i * channels + ch) * len;
        for (std::size_t t = 0; t < len; ++t) {
          out += ',';
          out += format_float(x[t]);
        }
        out += '\n';
      }
    }
  } else {
    nlohmann::ordered_json header;
    header["N"] = n;
    header["C"] = channels;
    header["T"] = len;
    header["num_classes"] = data.num_classes;
    header["labels"] = data.labels;
    if (!data.channel_names.empty()) header["channel_names"] = data.channel_names;
    out = header.dump() + '\n';
    out.reserve(out.size() + 4 * data.samples.size());
    for (auto v : data.samples.data()) append_f32_le(out, v);
  }
  write_file(path, out);
}

}  // namespace prism
