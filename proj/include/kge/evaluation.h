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

// Link prediction: for each test triple, every entity is tried in place of
// the head and of the tail, and the rank of the true entity by ascending
// energy is recorded. In the filtered setting, candidates that form another
// known-true triple are dropped first.

#ifndef KGE_EVALUATION_H_
#define KGE_EVALUATION_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kge/dataset.h"
#include "kge/models.h"

namespace kge {

// How candidates with the same energy as the target are counted.
enum class TiePolicy {
  kMean,         // 1 + lower + equal / 2
  kOptimistic,   // 1 + lower
  kPessimistic,  // 1 + lower + equal
};

const char* TiePolicyName(TiePolicy policy);
TiePolicy ParseTiePolicy(const std::string& name);

// Rank of `target` (an index into `energies`) among the candidates not
// excluded. `excluded` may be empty; the target itself is never excluded.
double RankFromEnergies(std::span<const double> energies, std::int32_t target,
                        std::span<const bool> excluded, TiePolicy policy);

double RankCandidates(const ModelParams& params, const Triple& triple,
                      Side side, const KnownTripleIndex& known, bool filtered,
                      TiePolicy policy = TiePolicy::kMean);

inline constexpr std::array<int, 3> kHitsAt = {1, 3, 10};

struct RankMetrics {
  std::int64_t count = 0;
  double mr = 0.0;
  double mrr = 0.0;
  std::array<double, 3> hits = {0.0, 0.0, 0.0};  // @1, @3, @10

  double hits_at(int k) const;
};

// Computes MR, MRR and Hits@{1,3,10} from a list of ranks.
RankMetrics MetricsFromRanks(std::span<const double> ranks);

// Hits@10 per prediction side and relation category.
struct CategoryBreakdown {
  // [side][category], side 0 = head prediction, 1 = tail prediction.
  std::array<std::array<double, 4>, 2> hits10 = {};
  std::array<std::array<std::int64_t, 4>, 2> counts = {};
};

struct SettingReport {
  RankMetrics overall;
  RankMetrics head;
  RankMetrics tail;
  CategoryBreakdown breakdown;
};

struct EvalReport {
  SettingReport raw;
  SettingReport filtered;
  TiePolicy tie_policy = TiePolicy::kMean;
  std::int64_t num_triples = 0;
};

struct EvalOptions {
  TiePolicy tie_policy = TiePolicy::kMean;
  std::int32_t threads = 1;
};

// Ranks both sides of every triple in `triples` (usually the test split).
// Categories come from `stats`.
EvalReport EvaluateLinkPrediction(const ModelParams& params,
                                  std::span<const Triple> triples,
                                  const KnownTripleIndex& known,
                                  const RelationStats& stats,
                                  const EvalOptions& options = {});

// Convenience over dataset.test with stats from dataset.train.
EvalReport EvaluateLinkPrediction(const ModelParams& params,
                                  const Dataset& dataset,
                                  const KnownTripleIndex& known,
                                  const EvalOptions& options = {});

// Flattened `key -> value` pairs in a fixed order, e.g.
// "filtered.mrr", "raw.hits@10", "filtered.hep.N-1.hits@10".
std::vector<std::pair<std::string, double>> FlattenReport(
    const EvalReport& report);

// One `key<TAB>value` line per entry of FlattenReport.
std::string FormatReport(const EvalReport& report);

}  // namespace kge

#endif  // KGE_EVALUATION_H_
