// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "prism/tensor.hpp"

namespace prism {

/// N labelled multichannel series sharing one (C, T) shape.
struct Dataset {
  Tensor<float> samples;  // (N, C, T)
  std::vector<int> labels;
  std::size_t num_classes = 0;
  std::vector<std::string> channel_names;

  std::size_t size() const { return labels.size(); }
  std::size_t channels() const { return samples.dim(1); }
  std::size_t length() const { return samples.dim(2); }

  /// Throws ConfigError when an invariant is broken.
  void validate() const;
  Dataset subset(std::span<const std::size_t> indices) const;
  /// Batch of the selected samples, converted to T.
  template <typename T>
  Tensor<T> batch(std::span<const std::size_t> indices) const;
  std::vector<int> batch_labels(std::span<const std::size_t> indices) const;

  bool operator==(const Dataset&) const = default;
};

struct FrequencyBand {
  double lo;  // cycles/sample
  double hi;
};

/// Each sample of class c is, per channel, a sum of sinusoids with
/// frequencies drawn from bands[c], random amplitude and phase, plus
/// Gaussian noise.
struct SynthSpec {
  std::vector<FrequencyBand> bands{{0.02, 0.06}, {0.08, 0.14}, {0.18, 0.26}, {0.30, 0.42}};
  std::size_t channels = 3;
  std::size_t length = 128;
  std::size_t per_class = 200;
  std::size_t sinusoids = 1;
  double noise_std = 0.5;
  double amplitude_lo = 0.5;
  double amplitude_hi = 1.5;
  bool allow_overlap = false;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Labels are laid out class-major (all of class 0 first).
Dataset generate_synth(const SynthSpec& spec);

/// Per-channel statistics fitted on a training split.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> std;

  static Standardization fit(const Dataset& train);
  /// x <- (x - mean) / (std + 1e-8)
  void apply(Dataset& data) const;
  bool operator==(const Standardization&) const = default;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of [0, n) cut into test, then val, then train. The three
/// parts partition [0, n). Each part is returned in ascending order.
SplitIndices split_indices(std::size_t n, double val_fraction, double test_fraction, std::uint64_t seed);

enum class DatasetFormat { Csv, Binary };
DatasetFormat parse_dataset_format(const std::string& s);
/// By extension: .csv -> Csv, everything else -> Binary.
DatasetFormat format_from_path(const std::filesystem::path& path);

/// CSV: one row per (sample, channel) `sample_id,channel_id,label,v_0,...,v_{T-1}`
/// with an optional header row. Binary: one JSON header line
/// {"N","C","T","num_classes","labels"} followed by N*C*T little-endian float32.
/// `num_classes` of 0 infers the count from the labels (CSV only).
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format, std::size_t num_classes = 0);
void save_dataset(const Dataset& data, const std::filesystem::path& path, DatasetFormat format);

/// Little-endian float32 helpers shared with the checkpoint writer.
void append_f32_le(std::string& out, float value);
float read_f32_le(const unsigned char* bytes);

}  // namespace prism
