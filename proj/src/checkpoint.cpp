// SPDX-License-Identifier: Apache-2.0
#include "prism/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prism/config.hpp"
#include "prism/errors.hpp"

namespace prism {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'I', 'S', 'M', 'C', 'K', 'P'};

void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

template <typename T>
Checkpoint make_checkpoint(Model<T>& model, std::optional<TrainConfig> train,
                           std::optional<Standardization> standardization) {
  Checkpoint c;
  c.model = model.config();
  c.train = std::move(train);
  c.standardization = std::move(standardization);
  std::uint64_t offset = 0;
  for (const auto* p : model.params()) {
    c.params.push_back({p->name, p->value.shape(), offset});
    for (T v : p->value.data()) c.payload.push_back(static_cast<float>(v));
    offset += 4 * p->value.size();
  }
  return c;
}

template <typename T>
void load_into(const Checkpoint& checkpoint, Model<T>& model) {
  auto params = model.params();
  if (params.size() != checkpoint.params.size()) {
    throw ShapeError("checkpoint has " + std::to_string(checkpoint.params.size()) + " params, model has " +
                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& e = checkpoint.params[i];
    auto& p = *params[i];
    if (e.name != p.name || e.shape != p.value.shape()) {
      throw ShapeError("checkpoint param " + e.name + " " + shape_str(e.shape) + " does not match model param " +
                       p.name + " " + shape_str(p.value.shape()));
    }
    const std::size_t first = e.offset / 4;
    if (first + p.value.size() > checkpoint.payload.size()) {
      throw ShapeError("checkpoint payload too short for " + e.name);
    }
    for (std::size_t j = 0; j < p.value.size(); ++j) p.value[j] = static_cast<T>(checkpoint.payload[first + j]);
  }
}

std::string serialize(const Checkpoint& c) {
  nlohmann::ordered_json h;
  h["model"] = to_json(c.model);
  h["train"] = c.train ? nlohmann::ordered_json(to_json(*c.train)) : nlohmann::ordered_json(nullptr);
  if (c.standardization) {
    h["standardization"] = {{"mean", c.standardization->mean}, {"std", c.standardization->std}};
  } else {
    h["standardization"] = nullptr;
  }
  auto manifest = nlohmann::ordered_json::array();
  for (const auto& e : c.params) {
    nlohmann::ordered_json m;
    m["name"] = e.name;
    m["shape"] = e.shape;
    m["offset"] = e.offset;
    manifest.push_back(std::move(m));
  }
  h["params"] = std::move(manifest);
  h["payload_bytes"] = 4 * c.payload.size();
  const std::string header = h.dump();

  std::string out(kMagic, sizeof kMagic);
  put_le(out, c.version, 4);
  put_le(out, header.size(), 8);
  out += header;
  out.reserve(out.size() + 4 * c.payload.size());
  for (float v : c.payload) append_f32_le(out, v);
  return out;
}

Checkpoint deserialize(std::string_view bytes, const std::string& source) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  constexpr std::size_t kPrefix = sizeof kMagic + 4 + 8;
  if (bytes.size() < kPrefix || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw IoError(source + ": not a PRISM checkpoint (bad magic at offset 0)");
  }
  Checkpoint c;
  c.version = static_cast<std::uint32_t>(get_le(p + 8, 4));
  if (c.version != kCheckpointVersion) {
    throw IoError(source + ": unsupported checkpoint version " + std::to_string(c.version) + " at offset 8");
  }
  const std::uint64_t header_len = get_le(p + 12, 8);
  if (header_len > bytes.size() - kPrefix) {
    throw IoError(source + ": header length " + std::to_string(header_len) + " at offset 12 exceeds file size");
  }
  std::uint64_t payload_bytes = 0;
  try {
    const auto h = nlohmann::json::parse(bytes.substr(kPrefix, header_len));
    c.model = model_config_from_json(h.at("model"));
    if (!h.at("train").is_null()) c.train = train_config_from_json(h.at("train"));
    if (!h.at("standardization").is_null()) {
      Standardization s;
      s.mean = h["standardization"].at("mean").get<std::vector<double>>();
      s.std = h["standardization"].at("std").get<std::vector<double>>();
      c.standardization = std::move(s);
    }
    for (const auto& m : h.at("params")) {
      c.params.push_back({m.at("name").get<std::string>(), m.at("shape").get<Shape>(),
                          m.at("offset").get<std::uint64_t>()});
    }
    payload_bytes = h.at("payload_bytes").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(source + ": malformed checkpoint header at offset " + std::to_string(kPrefix) + ": " + e.what());
  }
  const std::size_t start = kPrefix + header_len;
  if (bytes.size() - start != payload_bytes || payload_bytes % 4 != 0) {
    throw IoError(source + ": payload at offset " + std::to_string(start) + " has " +
                  std::to_string(bytes.size() - start) + " bytes, header declares " + std::to_string(payload_bytes));
  }
  std::uint64_t expected = 0;
  for (const auto& e : c.params) {
    if (e.offset != expected) {
      throw IoError(source + ": param " + e.name + " offset " + std::to_string(e.offset) + ", expected " +
                    std::to_string(expected));
    }
    expected += 4 * shape_numel(e.shape);
  }
  if (expected != payload_bytes) {
    throw IoError(source + ": manifest covers " + std::to_string(expected) + " bytes, payload has " +
                  std::to_string(payload_bytes));
  }
  c.payload.resize(payload_bytes / 4);
  for (std::size_t i = 0; i < c.payload.size(); ++i) c.payload[i] = read_f32_le(p + start + 4 * i);
  return c;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const auto bytes = serialize(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str(), path.string());
}

template Checkpoint make_checkpoint(Model<float>&, std::optional<TrainConfig>, std::optional<Standardization>);
template Checkpoint make_checkpoint(Model<double>&, std::optional<TrainConfig>, std::optional<Standardization>);
template void load_into(const Checkpoint&, Model<float>&);
template void load_into(const Checkpoint&, Model<double>&);

}  // namespace prism
