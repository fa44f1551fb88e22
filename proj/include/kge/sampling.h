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

#ifndef KGE_SAMPLING_H_
#define KGE_SAMPLING_H_

#include <cstdint>
#include <random>
#include <string>

#include "kge/dataset.h"
#include "kge/types.h"

namespace kge {

enum class SamplingMode { kUniform, kBern };

const char* SamplingModeName(SamplingMode mode);  // "unif" / "bern"
SamplingMode ParseSamplingMode(const std::string& name);

struct CorruptionPolicy {
  SamplingMode mode = SamplingMode::kBern;
  // Required for kBern; must cover every relation.
  const RelationStats* stats = nullptr;
  // Reject candidates that are known-true triples.
  bool filter_known = true;
  int max_attempts = 100;
};

struct CorruptionProbabilities {
  double head = 0.5;
  double tail = 0.5;
};

// Replaces the head or the tail (never both) of a positive triple with a
// different entity. Holds only diagnostic counters; give each worker its own
// instance and rng.
class NegativeSampler {
 public:
  NegativeSampler(const CorruptionPolicy& policy, std::int32_t num_entities,
                  std::int32_t num_relations,
                  const KnownTripleIndex* known = nullptr);

  // bern: head with tph/(tph+hpt), tail with hpt/(tph+hpt).
  CorruptionProbabilities Probabilities(RelationId relation) const;

  Triple Sample(const Triple& positive, std::mt19937_64& rng);
  // Corrupts the given side; the side draw is skipped.
  Triple SampleSide(const Triple& positive, Side side, std::mt19937_64& rng);

  // Draws that hit max_attempts and returned a known triple.
  std::uint64_t exhausted_retries() const { return exhausted_retries_; }
  // Probability lookups that fell back to 0.5 because tph + hpt == 0.
  std::uint64_t degenerate_stats() const { return degenerate_stats_; }

 private:
  CorruptionPolicy policy_;
  std::int32_t num_entities_;
  const KnownTripleIndex* known_;
  std::uint64_t exhausted_retries_ = 0;
  mutable std::uint64_t degenerate_stats_ = 0;
};

}  // namespace kge

#endif  // KGE_SAMPLING_H_
