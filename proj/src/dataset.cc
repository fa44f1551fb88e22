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

#include "kge/dataset.h"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace kge {

EntityId Vocabulary::AddEntity(std::string_view name) {
  auto [it, inserted] = entity_ids_.try_emplace(
      std::string(name), static_cast<EntityId>(entity_names_.size()));
  if (inserted) entity_names_.emplace_back(name);
  return it->second;
}

RelationId Vocabulary::AddRelation(std::string_view name) {
  auto [it, inserted] = relation_ids_.try_emplace(
      std::string(name), static_cast<RelationId>(relation_names_.size()));
  if (inserted) relation_names_.emplace_back(name);
  return it->second;
}

std::optional<EntityId> Vocabulary::FindEntity(std::string_view name) const {
  auto it = entity_ids_.find(std::string(name));
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocabulary::FindRelation(
    std::string_view name) const {
  auto it = relation_ids_.find(std::string(name));
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::EntityName(EntityId id) const {
  if (id < 0 || id >= num_entities()) {
    throw BoundsError("entity id " + std::to_string(id) + " out of range");
  }
  return entity_names_[static_cast<std::size_t>(id)];
}

const std::string& Vocabulary::RelationName(RelationId id) const {
  if (id < 0 || id >= num_relations()) {
    throw BoundsError("relation id " + std::to_string(id) + " out of range");
  }
  return relation_names_[static_cast<std::size_t>(id)];
}

std::uint64_t Vocabulary::Hash() const {
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= kPrime;
    }
    // 0xff never occurs in UTF-8, so it delimits names unambiguously.
    h ^= 0xff;
    h *= kPrime;
  };
  for (const auto& name : entity_names_) mix(name);
  mix("\x01relations");
  for (const auto& name : relation_names_) mix(name);
  return h;
}

void Dataset::Validate() const {
  auto check = [&](const std::vector<Triple>& split, const char* name) {
    for (std::size_t i = 0; i < split.size(); ++i) {
      if (!vocabulary.Contains(split[i])) {
        throw BoundsError(std::string(name) + " triple " + std::to_string(i) +
                          " has ids outside the vocabulary");
      }
    }
  };
  check(train, "train");
  check(valid, "valid");
  check(test, "test");
}

std::vector<Triple> ParseTriples(std::string_view text,
                                 const std::string& source,
                                 Vocabulary& vocabulary) {
  std::vector<Triple> triples;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::size_t tab1 = line.find('\t');
    std::size_t tab2 = tab1 == std::string_view::npos
                           ? std::string_view::npos
                           : line.find('\t', tab1 + 1);
    if (tab2 == std::string_view::npos ||
        line.find('\t', tab2 + 1) != std::string_view::npos) {
      std::size_t fields =
          static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t')) +
          1;
      throw ParseError(source, line_no,
                       "expected 3 tab-separated fields, found " +
                           std::to_string(fields) + " in \"" +
                           std::string(line) + "\"");
    }
    std::string_view head = line.substr(0, tab1);
    std::string_view relation = line.substr(tab1 + 1, tab2 - tab1 - 1);
    std::string_view tail = line.substr(tab2 + 1);
    if (head.empty() || relation.empty() || tail.empty()) {
      throw ParseError(source, line_no, "empty field");
    }
    Triple t;
    t.head = vocabulary.AddEntity(head);
    t.relation = vocabulary.AddRelation(relation);
    t.tail = vocabulary.AddEntity(tail);
    triples.push_back(t);
  }
  return triples;
}

namespace {

std::vector<Triple> LoadSplit(const std::string& path,
                              Vocabulary& vocabulary) {
  if (path.empty()) return {};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseTriples(buffer.str(), path, vocabulary);
}

}  // namespace

Dataset LoadDataset(const std::string& train_path,
                    const std::string& valid_path,
                    const std::string& test_path) {
  Dataset dataset;
  dataset.train = LoadSplit(train_path, dataset.vocabulary);
  if (dataset.train.empty()) {
    throw DataError("train split " + train_path + " is empty");
  }
  dataset.valid = LoadSplit(valid_path, dataset.vocabulary);
  dataset.test = LoadSplit(test_path, dataset.vocabulary);
  return dataset;
}

std::string FormatTriples(std::span<const Triple> triples,
                          const Vocabulary& vocabulary) {
  std::string out;
  for (const Triple& t : triples) {
    out += vocabulary.EntityName(t.head);
    out += '\t';
    out += vocabulary.RelationName(t.relation);
    out += '\t';
    out += vocabulary.EntityName(t.tail);
    out += '\n';
  }
  return out;
}

std::size_t KnownTripleIndex::TripleHash::operator()(const Triple& t) const {
  std::uint64_t h = static_cast<std::uint32_t>(t.head);
  h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(t.relation);
  h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint32_t>(t.tail);
  return static_cast<std::size_t>(h ^ (h >> 29));
}

KnownTripleIndex::KnownTripleIndex(const Dataset& dataset) {
  triples_.reserve(dataset.train.size() + dataset.valid.size() +
                   dataset.test.size());
  for (const auto* split : {&dataset.train, &dataset.valid, &dataset.test}) {
    for (const Triple& t : *split) triples_.insert(t);
  }
}

void KnownTripleIndex::Insert(const Triple& t) { triples_.insert(t); }

bool KnownTripleIndex::Contains(const Triple& t) const {
  return triples_.contains(t);
}

KnownTripleIndex BuildKnownIndex(const Dataset& dataset) {
  dataset.Validate();
  return KnownTripleIndex(dataset);
}

const char* CategoryName(RelationCategory category) {
  switch (category) {
    case RelationCategory::kOneToOne:
      return "1-1";
    case RelationCategory::kOneToMany:
      return "1-N";
    case RelationCategory::kManyToOne:
      return "N-1";
    case RelationCategory::kManyToMany:
      return "N-N";
  }
  return "?";
}

RelationCategory Categorize(double hpt, double tph, double threshold) {
  const bool many_heads = hpt > threshold;
  const bool many_tails = tph > threshold;
  if (many_heads && many_tails) return RelationCategory::kManyToMany;
  if (many_heads) return RelationCategory::kManyToOne;
  if (many_tails) return RelationCategory::kOneToMany;
  return RelationCategory::kOneToOne;
}

RelationStats ComputeRelationStats(const Dataset& dataset, double threshold) {
  if (dataset.train.empty()) throw DataError("train split is empty");
  const auto num_relations =
      static_cast<std::size_t>(dataset.vocabulary.num_relations());
  std::vector<std::unordered_set<EntityId>> heads(num_relations);
  std::vector<std::unordered_set<EntityId>> tails(num_relations);
  RelationStats stats;
  stats.threshold = threshold;
  stats.per_relation.resize(num_relations);
  for (const Triple& t : dataset.train) {
    if (!dataset.vocabulary.Contains(t)) {
      throw BoundsError("train triple outside the vocabulary");
    }
    const auto r = static_cast<std::size_t>(t.relation);
    heads[r].insert(t.head);
    tails[r].insert(t.tail);
    ++stats.per_relation[r].triples;
  }
  for (std::size_t r = 0; r < num_relations; ++r) {
    RelationStat& s = stats.per_relation[r];
    s.distinct_heads = static_cast<std::int64_t>(heads[r].size());
    s.distinct_tails = static_cast<std::int64_t>(tails[r].size());
    if (s.triples == 0) {
      stats.missing.push_back(static_cast<RelationId>(r));
      stats.warnings.push_back("relation " +
                               dataset.vocabulary.RelationName(
                                   static_cast<RelationId>(r)) +
                               " has no train triples; treated as 1-1");
      continue;
    }
    s.hpt = static_cast<double>(s.triples) /
            static_cast<double>(s.distinct_tails);
    s.tph = static_cast<double>(s.triples) /
            static_cast<double>(s.distinct_heads);
    s.category = Categorize(s.hpt, s.tph, threshold);
  }
  return stats;
}

}  // namespace kge
