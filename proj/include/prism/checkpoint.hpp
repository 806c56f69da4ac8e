// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "prism/dataset.hpp"
#include "prism/model.hpp"
#include "prism/train.hpp"

namespace prism {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ParamEntry {
  std::string name;
  Shape shape;
  std::uint64_t offset = 0;  // bytes into the payload
  bool operator==(const ParamEntry&) const = default;
};

/// File layout:
///   8 bytes  "PRISMCKP"
///   u32 LE   format version
///   u64 LE   header length H
///   H bytes  JSON header (model, train, standardization, params manifest)
///   payload  float32 LE values of every param in manifest order
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  ModelConfig model;
  std::optional<TrainConfig> train;
  std::optional<Standardization> standardization;
  std::vector<ParamEntry> params;
  std::vector<float> payload;

  bool operator==(const Checkpoint&) const = default;
};

/// Values are stored as float32; a float64 model is rounded.
template <typename T>
Checkpoint make_checkpoint(Model<T>& model, std::optional<TrainConfig> train = std::nullopt,
                           std::optional<Standardization> standardization = std::nullopt);

/// Copies the payload into a model built from the same config. Throws
/// ShapeError when the manifest does not match the model's params.
template <typename T>
void load_into(const Checkpoint& checkpoint, Model<T>& model);

std::string serialize(const Checkpoint& checkpoint);
/// Throws IoError on a bad magic, unsupported version, malformed header or
/// truncated payload; messages carry the byte offset.
Checkpoint deserialize(std::string_view bytes, const std::string& source = "<memory>");

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace prism
