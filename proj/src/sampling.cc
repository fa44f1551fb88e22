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

#include "kge/sampling.h"

namespace kge {

const char* SamplingModeName(SamplingMode mode) {
  return mode == SamplingMode::kBern ? "bern" : "unif";
}

SamplingMode ParseSamplingMode(const std::string& name) {
  if (name == "bern") return SamplingMode::kBern;
  if (name == "unif" || name == "uniform") return SamplingMode::kUniform;
  throw UsageError("unknown sampling mode '" + name + "'");
}

NegativeSampler::NegativeSampler(const CorruptionPolicy& policy,
                                 std::int32_t num_entities,
                                 std::int32_t num_relations,
                                 const KnownTripleIndex* known)
    : policy_(policy), num_entities_(num_entities), known_(known) {
  if (num_entities < 2) {
    throw DataError("negative sampling needs at least 2 entities");
  }
  if (policy.mode == SamplingMode::kBern &&
      (policy.stats == nullptr ||
       policy.stats->per_relation.size() <
           static_cast<std::size_t>(num_relations))) {
    throw UsageError("bern sampling requires statistics for every relation");
  }
  if (policy.max_attempts < 1) throw UsageError("max_attempts must be >= 1");
  if (policy.filter_known && known == nullptr) {
    throw UsageError("filtered sampling requires a known-triple index");
  }
}

CorruptionProbabilities NegativeSampler::Probabilities(
    RelationId relation) const {
  if (policy_.mode == SamplingMode::kUniform) return {0.5, 0.5};
  const RelationStat& s = (*policy_.stats)[relation];
  const double total = s.tph + s.hpt;
  if (!(total > 0.0)) {
    ++degenerate_stats_;
    return {0.5, 0.5};
  }
  return {s.tph / total, s.hpt / total};
}

Triple NegativeSampler::Sample(const Triple& positive, std::mt19937_64& rng) {
  const double p_head = Probabilities(positive.relation).head;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const Side side = coin(rng) < p_head ? Side::kHead : Side::kTail;
  return SampleSide(positive, side, rng);
}

Triple NegativeSampler::SampleSide(const Triple& positive, Side side,
                                   std::mt19937_64& rng) {
  const EntityId original =
      side == Side::kHead ? positive.head : positive.tail;
  // Uniform over the Ne - 1 entities other than the original.
  std::uniform_int_distribution<EntityId> pick(0, num_entities_ - 2);
  Triple candidate = positive;
  for (int attempt = 0; attempt < policy_.max_attempts; ++attempt) {
    EntityId e = pick(rng);
    if (e >= original) ++e;
    (side == Side::kHead ? candidate.head : candidate.tail) = e;
    if (!policy_.filter_known || !known_->Contains(candidate)) {
      return candidate;
    }
  }
  ++exhausted_retries_;
  return candidate;
}

}  // namespace kge
