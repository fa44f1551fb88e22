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

// Checkpoint files, relation export and report serialisation.
//
// Checkpoint layout (all integers little-endian):
//
//   offset 0   "KGEC"
//          4   u32 format version (1)
//          8   u64 body length B
//         16   body:
//                u32 metadata length, metadata as UTF-8 JSON
//                u32 tensor count
//                per tensor, in ModelParams::ActiveTensors() order:
//                  u16 name length, name
//                  u8  element width (4 = float32, 8 = float64)
//                  u32 rank, u64 dims[rank]
//                  elements, row-major
//     16 + B   u32 CRC-32 of the body

#ifndef KGE_IO_H_
#define KGE_IO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kge/dataset.h"
#include "kge/evaluation.h"
#include "kge/models.h"
#include "kge/training.h"

namespace kge {

inline constexpr char kCheckpointMagic[4] = {'K', 'G', 'E', 'C'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public DataError {
 public:
  enum class Code {
    kIo,
    kBadMagic,
    kVersion,
    kTruncated,
    kChecksum,
    kShape,
    kMetadata,
    kVocabulary,
  };

  CheckpointError(Code code, const std::string& what)
      : DataError(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

enum class StorageType : std::uint8_t { kFloat32 = 4, kFloat64 = 8 };

struct CheckpointMetadata {
  ModelKind kind = ModelKind::kTransE;
  std::int32_t num_entities = 0;
  std::int32_t num_relations = 0;
  EnergyConfig energy;
  std::uint64_t vocabulary_hash = 0;
  std::optional<TrainConfig> train_config;
  std::int32_t epoch = 0;
};

struct Checkpoint {
  ModelParams params;
  CheckpointMetadata metadata;
};

// Fills the model fields of the metadata from `params`.
CheckpointMetadata MakeMetadata(const ModelParams& params,
                                const Vocabulary& vocabulary);

nlohmann::json ToJson(const EnergyConfig& config);
nlohmann::json ToJson(const TrainConfig& config);
nlohmann::json ToJson(const CheckpointMetadata& metadata);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);
CheckpointMetadata MetadataFromJson(const nlohmann::json& j);

std::vector<std::uint8_t> SerializeCheckpoint(
    const ModelParams& params, const CheckpointMetadata& metadata,
    StorageType storage = StorageType::kFloat64);
Checkpoint ParseCheckpoint(const std::vector<std::uint8_t>& bytes);

// Writes to a temporary file next to `path` and renames it into place.
void SaveCheckpoint(const ModelParams& params,
                    const CheckpointMetadata& metadata,
                    const std::string& path,
                    StorageType storage = StorageType::kFloat64);
Checkpoint LoadCheckpoint(const std::string& path);

// Throws CheckpointError(kVocabulary) unless the hashes agree or
// `allow_mismatch` is set.
void CheckVocabulary(const CheckpointMetadata& metadata,
                     const Vocabulary& vocabulary, bool allow_mismatch);

// Atomic text write (temporary file + rename).
void WriteTextFile(const std::string& path, const std::string& contents);

// Shortest round-trip decimal, at most 9 significant digits.
std::string FormatFloat(double value);

// TSV with a header row and one row per relation in vocabulary order:
// name, r (d_r values), alpha (s values), beta (s values). With
// `translation_only` the coefficient columns are omitted.
std::string FormatRelationExport(const ModelParams& params,
                                 const Vocabulary& vocabulary,
                                 bool translation_only = false);
void ExportRelations(const ModelParams& params, const Vocabulary& vocabulary,
                     const std::string& path, bool translation_only = false);

// {"tie_policy": ..., "metrics": {key: value, ...}} with FlattenReport keys.
nlohmann::json ReportToJson(const EvalReport& report);

}  // namespace kge

#endif  // KGE_IO_H_
