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

#ifndef KGE_DATASET_H_
#define KGE_DATASET_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kge/types.h"

namespace kge {

// Two dense name <-> id tables, one for entities and one for relations.
class Vocabulary {
 public:
  // Returns the id of `name`, inserting it at the end if new.
  EntityId AddEntity(std::string_view name);
  RelationId AddRelation(std::string_view name);

  std::optional<EntityId> FindEntity(std::string_view name) const;
  std::optional<RelationId> FindRelation(std::string_view name) const;

  const std::string& EntityName(EntityId id) const;
  const std::string& RelationName(RelationId id) const;

  std::int32_t num_entities() const {
    return static_cast<std::int32_t>(entity_names_.size());
  }
  std::int32_t num_relations() const {
    return static_cast<std::int32_t>(relation_names_.size());
  }
  const std::vector<std::string>& entity_names() const {
    return entity_names_;
  }
  const std::vector<std::string>& relation_names() const {
    return relation_names_;
  }

  bool Contains(const Triple& t) const {
    return t.head >= 0 && t.head < num_entities() && t.tail >= 0 &&
           t.tail < num_entities() && t.relation >= 0 &&
           t.relation < num_relations();
  }

  // FNV-1a over both name lists; identifies a vocabulary in checkpoints.
  std::uint64_t Hash() const;

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> relation_names_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
};

struct Dataset {
  Vocabulary vocabulary;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;

  // Throws BoundsError if any triple is outside the vocabulary.
  void Validate() const;
};

// Parses `head<TAB>relation<TAB>tail` files. The vocabulary is built over
// all three splits in first-appearance order (train, then valid, then test).
// An empty `valid_path` or `test_path` yields an empty split.
Dataset LoadDataset(const std::string& train_path,
                    const std::string& valid_path,
                    const std::string& test_path);

// Same parser over in-memory text; `source` names the input in errors.
std::vector<Triple> ParseTriples(std::string_view text,
                                 const std::string& source,
                                 Vocabulary& vocabulary);

// Writes id-decoded triples in the loader's input format.
std::string FormatTriples(std::span<const Triple> triples,
                          const Vocabulary& vocabulary);

// Membership set over train U valid U test.
class KnownTripleIndex {
 public:
  KnownTripleIndex() = default;
  explicit KnownTripleIndex(const Dataset& dataset);

  void Insert(const Triple& t);
  bool Contains(const Triple& t) const;
  std::size_t size() const { return triples_.size(); }

 private:
  struct TripleHash {
    std::size_t operator()(const Triple& t) const;
  };

  std::unordered_set<Triple, TripleHash> triples_;
};

KnownTripleIndex BuildKnownIndex(const Dataset& dataset);

enum class RelationCategory { kOneToOne, kOneToMany, kManyToOne, kManyToMany };

const char* CategoryName(RelationCategory category);

struct RelationStat {
  double hpt = 0.0;  // train triples / distinct tails
  double tph = 0.0;  // train triples / distinct heads
  std::int64_t triples = 0;
  std::int64_t distinct_heads = 0;
  std::int64_t distinct_tails = 0;
  RelationCategory category = RelationCategory::kOneToOne;
};

struct RelationStats {
  std::vector<RelationStat> per_relation;
  double threshold = 1.5;
  // Relations with no train triples; their stats are zero and 1-1.
  std::vector<RelationId> missing;
  std::vector<std::string> warnings;

  const RelationStat& operator[](RelationId r) const {
    return per_relation.at(static_cast<std::size_t>(r));
  }
};

// Tail side is "N" when tph > threshold, head side when hpt > threshold.
RelationCategory Categorize(double hpt, double tph, double threshold = 1.5);

// Statistics over the train split only.
RelationStats ComputeRelationStats(const Dataset& dataset,
                                   double threshold = 1.5);

}  // namespace kge

#endif  // KGE_DATASET_H_
