/*
 * Copyright 2026 The kge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "kge/io.h"

#include <zlib.h>

#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace kge {
namespace {

using Code = CheckpointError::Code;

class Writer {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U16(std::uint16_t v) { Le(v, 2); }
  void U32(std::uint32_t v) { Le(v, 4); }
  void U64(std::uint64_t v) { Le(v, 8); }
  void Bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  void Le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size)
      : data_(data), size_(size) {}

  std::uint8_t U8() { return static_cast<std::uint8_t>(Le(1)); }
  std::uint16_t U16() { return static_cast<std::uint16_t>(Le(2)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Le(4)); }
  std::uint64_t U64() { return Le(8); }
  const std::uint8_t* Take(std::size_t n) {
    Need(n);
    const std::uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  void Need(std::size_t n) const {
    if (n > size_ - pos_) {
      throw CheckpointError(Code::kTruncated, "checkpoint body ends early");
    }
  }
  std::uint64_t Le(int n) {
    const std::uint8_t* p = Take(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint64_t ReadLe(const std::uint8_t* p, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::uint32_t Crc32(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string Hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t ParseHex64(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw CheckpointError(Code::kMetadata, "bad vocabulary hash '" + s + "'");
  }
  return v;
}

std::vector<std::uint8_t> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Code::kIo, "cannot open " + path);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void WriteFileAtomic(const std::string& path, const void* data,
                     std::size_t size) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp);
    out.write(static_cast<const char*>(data),
              static_cast<std::streamsize>(size));
    if (!out) throw DataError("write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw DataError("cannot move " + tmp + " to " + path + ": " +
                    ec.message());
  }
}

}  // namespace

CheckpointMetadata MakeMetadata(const ModelParams& params,
                                const Vocabulary& vocabulary) {
  CheckpointMetadata m;
  m.kind = params.kind();
  m.num_entities = params.num_entities();
  m.num_relations = params.num_relations();
  m.energy = params.config();
  m.vocabulary_hash = vocabulary.Hash();
  return m;
}

nlohmann::json ToJson(const EnergyConfig& config) {
  return {{"norm", NormName(config.norm)},
          {"dim_e", config.dim_e},
          {"dim_r", config.dim_r},
          {"bases", config.bases},
          {"normalize_projections", config.normalize_projections}};
}

nlohmann::json ToJson(const TrainConfig& c) {
  return {{"margin", c.margin},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"pretrain_epochs", c.pretrain_epochs},
          {"sampling", SamplingModeName(c.sampling)},
          {"filter_negatives", c.filter_negatives},
          {"negatives_per_positive", c.negatives_per_positive},
          {"seed", c.seed},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"bound_entities", c.bound_entities},
          {"threads", c.threads},
          {"validate_every", c.validate_every},
          {"patience", c.patience}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.margin = j.value("margin", c.margin);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
  c.sampling = ParseSamplingMode(
      j.value("sampling", std::string(SamplingModeName(c.sampling))));
  c.filter_negatives = j.value("filter_negatives", c.filter_negatives);
  c.negatives_per_positive =
      j.value("negatives_per_positive", c.negatives_per_positive);
  c.seed = j.value("seed", c.seed);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.bound_entities = j.value("bound_entities", c.bound_entities);
  c.threads = j.value("threads", c.threads);
  c.validate_every = j.value("validate_every", c.validate_every);
  c.patience = j.value("patience", c.patience);
  return c;
}

nlohmann::json ToJson(const CheckpointMetadata& m) {
  nlohmann::json j = ToJson(m.energy);
  j["model"] = ModelKindName(m.kind);
  j["num_entities"] = m.num_entities;
  j["num_relations"] = m.num_relations;
  j["vocabulary_hash"] = Hex64(m.vocabulary_hash);
  j["train_config"] =
      m.train_config ? ToJson(*m.train_config) : nlohmann::json(nullptr);
  j["epoch"] = m.epoch;
  return j;
}

CheckpointMetadata MetadataFromJson(const nlohmann::json& j) {
  try {
    CheckpointMetadata m;
    m.kind = ParseModelKind(j.at("model").get<std::string>());
    m.num_entities = j.at("num_entities").get<std::int32_t>();
    m.num_relations = j.at("num_relations").get<std::int32_t>();
    m.energy.norm = ParseNorm(j.at("norm").get<std::string>());
    m.energy.dim_e = j.at("dim_e").get<std::int32_t>();
    m.energy.dim_r = j.at("dim_r").get<std::int32_t>();
    m.energy.bases = j.at("bases").get<std::int32_t>();
    m.energy.normalize_projections =
        j.at("normalize_projections").get<bool>();
    m.vocabulary_hash =
        ParseHex64(j.at("vocabulary_hash").get<std::string>());
    if (j.contains("train_config") && !j.at("train_config").is_null()) {
      m.train_config = TrainConfigFromJson(j.at("train_config"));
    }
    m.epoch = j.value("epoch", 0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(Code::kMetadata,
                          std::string("bad checkpoint metadata: ") + e.what());
  } catch (const UsageError& e) {
    throw CheckpointError(Code::kMetadata,
                          std::string("bad checkpoint metadata: ") + e.what());
  }
}

std::vector<std::uint8_t> SerializeCheckpoint(
    const ModelParams& params, const CheckpointMetadata& metadata,
    StorageType storage) {
  Writer body;
  const std::string meta = ToJson(metadata).dump();
  body.U32(static_cast<std::uint32_t>(meta.size()));
  body.Bytes(meta.data(), meta.size());
  const auto tensors = params.ActiveTensors();
  body.U32(static_cast<std::uint32_t>(tensors.size()));
  for (TensorId id : tensors) {
    const std::string name = TensorName(id);
    body.U16(static_cast<std::uint16_t>(name.size()));
    body.Bytes(name.data(), name.size());
    body.U8(static_cast<std::uint8_t>(storage));
    const auto shape = params.Shape(id);
    body.U32(static_cast<std::uint32_t>(shape.size()));
    for (std::int64_t d : shape) body.U64(static_cast<std::uint64_t>(d));
    for (double v : params.tensor(id).data) {
      if (storage == StorageType::kFloat32) {
        body.U32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      } else {
        body.U64(std::bit_cast<std::uint64_t>(v));
      }
    }
  }

  Writer file;
  file.Bytes(kCheckpointMagic, 4);
  file.U32(kCheckpointVersion);
  file.U64(body.bytes().size());
  file.Bytes(body.bytes().data(), body.bytes().size());
  file.U32(Crc32(body.bytes().data(), body.bytes().size()));
  return std::move(file.bytes());
}

Checkpoint ParseCheckpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) {
    throw CheckpointError(Code::kBadMagic, "not a KGEC checkpoint");
  }
  if (bytes.size() < 16) {
    throw CheckpointError(Code::kTruncated, "checkpoint header is truncated");
  }
  const auto version = static_cast<std::uint32_t>(ReadLe(bytes.data() + 4, 4));
  if (version != kCheckpointVersion) {
    throw CheckpointError(Code::kVersion,
                          "unsupported checkpoint version " +
                              std::to_string(version) + " (expected " +
                              std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t body_size = ReadLe(bytes.data() + 8, 8);
  const std::uint64_t available = bytes.size() - 16;
  if (available < 4 || body_size > available - 4) {
    throw CheckpointError(Code::kTruncated,
                          "checkpoint is shorter than its declared body");
  }
  if (body_size != available - 4) {
    throw CheckpointError(Code::kShape,
                          "checkpoint has trailing bytes after its body");
  }
  const std::uint8_t* body = bytes.data() + 16;
  const auto stored_crc =
      static_cast<std::uint32_t>(ReadLe(body + body_size, 4));
  if (Crc32(body, body_size) != stored_crc) {
    throw CheckpointError(Code::kChecksum, "checkpoint checksum mismatch");
  }

  Reader in(body, body_size);
  const std::uint32_t meta_size = in.U32();
  const auto* meta_bytes = reinterpret_cast<const char*>(in.Take(meta_size));
  nlohmann::json meta_json;
  try {
    meta_json = nlohmann::json::parse(meta_bytes, meta_bytes + meta_size);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(Code::kMetadata,
                          std::string("bad checkpoint metadata: ") + e.what());
  }
  Checkpoint ckpt;
  ckpt.metadata = MetadataFromJson(meta_json);
  const CheckpointMetadata& m = ckpt.metadata;
  if (m.num_entities < 1 || m.num_relations < 1) {
    throw CheckpointError(Code::kMetadata, "checkpoint has an empty model");
  }
  try {
    ckpt.params =
        ModelParams(m.kind, m.energy, m.num_entities, m.num_relations);
  } catch (const UsageError& e) {
    throw CheckpointError(Code::kMetadata, e.what());
  }

  const auto expected = ckpt.params.ActiveTensors();
  const std::uint32_t count = in.U32();
  if (count != expected.size()) {
    throw CheckpointError(Code::kShape,
                          "checkpoint holds " + std::to_string(count) +
                              " tensors, model needs " +
                              std::to_string(expected.size()));
  }
  for (TensorId id : expected) {
    const std::uint16_t name_size = in.U16();
    const auto* name = reinterpret_cast<const char*>(in.Take(name_size));
    if (std::string(name, name_size) != TensorName(id)) {
      throw CheckpointError(Code::kShape,
                            "expected tensor '" + std::string(TensorName(id)) +
                                "', found '" + std::string(name, name_size) +
                                "'");
    }
    const std::uint8_t width = in.U8();
    if (width != 4 && width != 8) {
      throw CheckpointError(Code::kShape, "unknown element width " +
                                              std::to_string(width));
    }
    const std::uint32_t rank = in.U32();
    std::vector<std::int64_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::int64_t>(in.U64());
    if (shape != ckpt.params.Shape(id)) {
      throw CheckpointError(Code::kShape,
                            std::string("tensor '") + TensorName(id) +
                                "' does not match the metadata dimensions");
    }
    auto& data = ckpt.params.tensor(id).data;
    if (data.size() > in.remaining() / width) {
      throw CheckpointError(Code::kTruncated,
                            std::string("tensor '") + TensorName(id) +
                                "' is truncated");
    }
    for (double& v : data) {
      v = width == 4 ? static_cast<double>(std::bit_cast<float>(in.U32()))
                     : std::bit_cast<double>(in.U64());
    }
  }
  if (in.remaining() != 0) {
    throw CheckpointError(Code::kShape, "unexpected bytes after last tensor");
  }
  return ckpt;
}

void SaveCheckpoint(const ModelParams& params,
                    const CheckpointMetadata& metadata,
                    const std::string& path, StorageType storage) {
  const auto bytes = SerializeCheckpoint(params, metadata, storage);
  WriteFileAtomic(path, bytes.data(), bytes.size());
}

Checkpoint LoadCheckpoint(const std::string& path) {
  return ParseCheckpoint(ReadFile(path));
}

void CheckVocabulary(const CheckpointMetadata& metadata,
                     const Vocabulary& vocabulary, bool allow_mismatch) {
  if (metadata.num_entities != vocabulary.num_entities() ||
      metadata.num_relations != vocabulary.num_relations()) {
    throw CheckpointError(Code::kVocabulary,
                          "checkpoint vocabulary size differs from dataset");
  }
  if (!allow_mismatch && metadata.vocabulary_hash != vocabulary.Hash()) {
    throw CheckpointError(Code::kVocabulary,
                          "checkpoint vocabulary hash " +
                              Hex64(metadata.vocabulary_hash) +
                              " does not match dataset " +
                              Hex64(vocabulary.Hash()));
  }
}

void WriteTextFile(const std::string& path, const std::string& contents) {
  WriteFileAtomic(path, contents.data(), contents.size());
}

std::string FormatFloat(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  // More than 9 significant digits: fall back to 9-digit rounding.
  std::size_t digits = 0;
  for (const char* p = buf; p < res.ptr && *p != 'e'; ++p) {
    if (*p >= '0' && *p <= '9') ++digits;
  }
  std::string_view shortest(buf, static_cast<std::size_t>(res.ptr - buf));
  // Leading zeros of a fraction ("0.00123") are not significant.
  std::size_t leading = 0;
  for (char c : shortest) {
    if (c == '-' || c == '.') continue;
    if (c != '0') break;
    ++leading;
  }
  if (digits - leading <= 9) return std::string(shortest);
  res = std::to_chars(buf, buf + sizeof(buf), value,
                      std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

std::string FormatRelationExport(const ModelParams& params,
                                 const Vocabulary& vocabulary,
                                 bool translation_only) {
  if (vocabulary.num_relations() != params.num_relations()) {
    throw DataError("vocabulary and model disagree on the relation count");
  }
  const std::int32_t dr = params.config().dim_r;
  const bool coefficients =
      !translation_only && params.kind() == ModelKind::kTransF;
  const std::int32_t s = coefficients ? params.config().bases : 0;
  std::string out = "relation";
  for (std::int32_t k = 0; k < dr; ++k) out += "\tr" + std::to_string(k);
  for (std::int32_t k = 0; k < s; ++k) out += "\talpha" + std::to_string(k);
  for (std::int32_t k = 0; k < s; ++k) out += "\tbeta" + std::to_string(k);
  out += '\n';
  for (RelationId r = 0; r < params.num_relations(); ++r) {
    out += vocabulary.RelationName(r);
    auto append = [&](std::span<const double> values) {
      for (double v : values) {
        out += '\t';
        out += FormatFloat(v);
      }
    };
    append(params.tensor(TensorId::kRelation).Row(r));
    if (coefficients) {
      append(params.tensor(TensorId::kHeadCoef).Row(r));
      append(params.tensor(TensorId::kTailCoef).Row(r));
    }
    out += '\n';
  }
  return out;
}

void ExportRelations(const ModelParams& params, const Vocabulary& vocabulary,
                     const std::string& path, bool translation_only) {
  WriteTextFile(path, FormatRelationExport(params, vocabulary, translation_only));
}

nlohmann::json ReportToJson(const EvalReport& report) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [key, value] : FlattenReport(report)) metrics[key] = value;
  return {{"tie_policy", TiePolicyName(report.tie_policy)},
          {"metrics", metrics}};
}

}  // namespace kge
