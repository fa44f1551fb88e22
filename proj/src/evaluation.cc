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

#include "kge/evaluation.h"

#include <algorithm>
#include <charconv>
#include <memory>
#include <thread>

namespace kge {
namespace {

struct TripleRanks {
  double raw_head = 0.0;
  double raw_tail = 0.0;
  double filtered_head = 0.0;
  double filtered_tail = 0.0;
};

// Marks candidates that complete a known triple other than the target.
void MarkKnown(const Triple& triple, Side side, const KnownTripleIndex& known,
               std::span<bool> excluded) {
  Triple probe = triple;
  EntityId& slot = side == Side::kHead ? probe.head : probe.tail;
  const EntityId target = slot;
  for (std::size_t c = 0; c < excluded.size(); ++c) {
    slot = static_cast<EntityId>(c);
    excluded[c] = slot != target && known.Contains(probe);
  }
}

void RankTriple(const ModelParams& params, const Triple& triple,
                const KnownTripleIndex& known, TiePolicy policy,
                std::vector<double>& energies,
                std::unique_ptr<bool[]>& excluded_storage, TripleRanks& out) {
  const auto n = static_cast<std::size_t>(params.num_entities());
  std::span<bool> excluded(excluded_storage.get(), n);
  for (Side side : {Side::kHead, Side::kTail}) {
    CandidateEnergies(params, triple, side, energies);
    const EntityId target = side == Side::kHead ? triple.head : triple.tail;
    const double raw = RankFromEnergies(energies, target, {}, policy);
    MarkKnown(triple, side, known, excluded);
    const double filtered =
        RankFromEnergies(energies, target, excluded, policy);
    if (side == Side::kHead) {
      out.raw_head = raw;
      out.filtered_head = filtered;
    } else {
      out.raw_tail = raw;
      out.filtered_tail = filtered;
    }
  }
}

SettingReport Summarize(std::span<const Triple> triples,
                        const std::vector<TripleRanks>& ranks, bool filtered,
                        const RelationStats& stats) {
  std::vector<double> head, tail, both;
  head.reserve(ranks.size());
  tail.reserve(ranks.size());
  SettingReport report;
  std::array<std::array<std::int64_t, 4>, 2> hits{};
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const double h = filtered ? ranks[i].filtered_head : ranks[i].raw_head;
    const double t = filtered ? ranks[i].filtered_tail : ranks[i].raw_tail;
    head.push_back(h);
    tail.push_back(t);
    const auto r = static_cast<std::size_t>(triples[i].relation);
    const auto cat = static_cast<std::size_t>(
        r < stats.per_relation.size() ? stats.per_relation[r].category
                                      : RelationCategory::kOneToOne);
    ++report.breakdown.counts[0][cat];
    ++report.breakdown.counts[1][cat];
    if (h <= 10.0) ++hits[0][cat];
    if (t <= 10.0) ++hits[1][cat];
  }
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t c = 0; c < 4; ++c) {
      const auto n = report.breakdown.counts[s][c];
      report.breakdown.hits10[s][c] =
          n == 0 ? 0.0
                 : static_cast<double>(hits[s][c]) / static_cast<double>(n);
    }
  }
  both = head;
  both.insert(both.end(), tail.begin(), tail.end());
  report.overall = MetricsFromRanks(both);
  report.head = MetricsFromRanks(head);
  report.tail = MetricsFromRanks(tail);
  return report;
}

void AppendMetrics(std::vector<std::pair<std::string, double>>& out,
                   const std::string& prefix, const RankMetrics& m) {
  out.emplace_back(prefix + "count", static_cast<double>(m.count));
  out.emplace_back(prefix + "mr", m.mr);
  out.emplace_back(prefix + "mrr", m.mrr);
  for (std::size_t k = 0; k < kHitsAt.size(); ++k) {
    out.emplace_back(prefix + "hits@" + std::to_string(kHitsAt[k]), m.hits[k]);
  }
}

}  // namespace

const char* TiePolicyName(TiePolicy policy) {
  switch (policy) {
    case TiePolicy::kMean:
      return "mean";
    case TiePolicy::kOptimistic:
      return "optimistic";
    case TiePolicy::kPessimistic:
      return "pessimistic";
  }
  return "?";
}

TiePolicy ParseTiePolicy(const std::string& name) {
  for (TiePolicy p :
       {TiePolicy::kMean, TiePolicy::kOptimistic, TiePolicy::kPessimistic}) {
    if (name == TiePolicyName(p)) return p;
  }
  throw UsageError("unknown tie policy '" + name + "'");
}

double RankFromEnergies(std::span<const double> energies, std::int32_t target,
                        std::span<const bool> excluded, TiePolicy policy) {
  if (target < 0 || static_cast<std::size_t>(target) >= energies.size()) {
    throw InternalError("rank target outside the candidate list");
  }
  if (!excluded.empty() && excluded[static_cast<std::size_t>(target)]) {
    throw InternalError("target triple was filtered out of its own ranking");
  }
  const double e = energies[static_cast<std::size_t>(target)];
  std::int64_t lower = 0, equal = 0;
  for (std::size_t c = 0; c < energies.size(); ++c) {
    if (c == static_cast<std::size_t>(target)) continue;
    if (!excluded.empty() && excluded[c]) continue;
    if (energies[c] < e) {
      ++lower;
    } else if (energies[c] == e) {
      ++equal;
    }
  }
  switch (policy) {
    case TiePolicy::kMean:
      return 1.0 + static_cast<double>(lower) + static_cast<double>(equal) / 2.0;
    case TiePolicy::kOptimistic:
      return 1.0 + static_cast<double>(lower);
    case TiePolicy::kPessimistic:
      return 1.0 + static_cast<double>(lower + equal);
  }
  return 0.0;
}

double RankCandidates(const ModelParams& params, const Triple& triple,
                      Side side, const KnownTripleIndex& known, bool filtered,
                      TiePolicy policy) {
  const auto n = static_cast<std::size_t>(params.num_entities());
  std::vector<double> energies(n);
  CandidateEnergies(params, triple, side, energies);
  const EntityId target = side == Side::kHead ? triple.head : triple.tail;
  if (!filtered) return RankFromEnergies(energies, target, {}, policy);
  std::unique_ptr<bool[]> excluded(new bool[n]);
  MarkKnown(triple, side, known, {excluded.get(), n});
  return RankFromEnergies(energies, target, {excluded.get(), n}, policy);
}

double RankMetrics::hits_at(int k) const {
  for (std::size_t i = 0; i < kHitsAt.size(); ++i) {
    if (kHitsAt[i] == k) return hits[i];
  }
  throw UsageError("hits@" + std::to_string(k) + " is not tracked");
}

RankMetrics MetricsFromRanks(std::span<const double> ranks) {
  RankMetrics m;
  m.count = static_cast<std::int64_t>(ranks.size());
  if (ranks.empty()) return m;
  std::array<std::int64_t, 3> hit_counts{};
  for (double r : ranks) {
    m.mr += r;
    m.mrr += 1.0 / r;
    for (std::size_t k = 0; k < kHitsAt.size(); ++k) {
      if (r <= kHitsAt[k]) ++hit_counts[k];
    }
  }
  const auto n = static_cast<double>(ranks.size());
  m.mr /= n;
  m.mrr /= n;
  for (std::size_t k = 0; k < kHitsAt.size(); ++k) {
    m.hits[k] = static_cast<double>(hit_counts[k]) / n;
  }
  return m;
}

EvalReport EvaluateLinkPrediction(const ModelParams& params,
                                  std::span<const Triple> triples,
                                  const KnownTripleIndex& known,
                                  const RelationStats& stats,
                                  const EvalOptions& options) {
  if (triples.empty()) throw DataError("evaluation split is empty");
  if (options.threads < 1) throw UsageError("threads must be >= 1");
  std::vector<TripleRanks> ranks(triples.size());
  const auto n = static_cast<std::size_t>(params.num_entities());

  auto work = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> energies(n);
    std::unique_ptr<bool[]> excluded(new bool[n]);
    for (std::size_t i = lo; i < hi; ++i) {
      RankTriple(params, triples[i], known, options.tie_policy, energies,
                 excluded, ranks[i]);
    }
  };
  const auto workers =
      std::min(static_cast<std::size_t>(options.threads), triples.size());
  if (workers <= 1) {
    work(0, triples.size());
  } else {
    // Each worker writes its own slots of `ranks`; the reduction below runs
    // in triple order, so the report does not depend on the thread count.
    const std::size_t per = (triples.size() + workers - 1) / workers;
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> threads;
      for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
          try {
            work(std::min(triples.size(), w * per),
                 std::min(triples.size(), (w + 1) * per));
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  EvalReport report;
  report.tie_policy = options.tie_policy;
  report.num_triples = static_cast<std::int64_t>(triples.size());
  report.raw = Summarize(triples, ranks, false, stats);
  report.filtered = Summarize(triples, ranks, true, stats);
  return report;
}

EvalReport EvaluateLinkPrediction(const ModelParams& params,
                                  const Dataset& dataset,
                                  const KnownTripleIndex& known,
                                  const EvalOptions& options) {
  return EvaluateLinkPrediction(params, dataset.test, known,
                                ComputeRelationStats(dataset), options);
}

std::vector<std::pair<std::string, double>> FlattenReport(
    const EvalReport& report) {
  std::vector<std::pair<std::string, double>> out;
  out.emplace_back("num_triples", static_cast<double>(report.num_triples));
  for (const auto& [name, setting] :
       {std::pair<std::string, const SettingReport*>{"raw", &report.raw},
        std::pair<std::string, const SettingReport*>{"filtered",
                                                     &report.filtered}}) {
    AppendMetrics(out, name + ".", setting->overall);
    AppendMetrics(out, name + ".head.", setting->head);
    AppendMetrics(out, name + ".tail.", setting->tail);
    for (std::size_t s = 0; s < 2; ++s) {
      const std::string side = s == 0 ? "hep" : "tep";
      for (std::size_t c = 0; c < 4; ++c) {
        const std::string cell = name + "." + side + "." +
                                 CategoryName(static_cast<RelationCategory>(c));
        out.emplace_back(cell + ".hits@10", setting->breakdown.hits10[s][c]);
        out.emplace_back(cell + ".count",
                         static_cast<double>(setting->breakdown.counts[s][c]));
      }
    }
  }
  return out;
}

std::string FormatReport(const EvalReport& report) {
  std::string text = "tie_policy\t";
  text += TiePolicyName(report.tie_policy);
  text += '\n';
  char buf[64];
  for (const auto& [key, value] : FlattenReport(report)) {
    text += key;
    text += '\t';
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    text.append(buf, res.ptr);
    text += '\n';
  }
  return text;
}

}  // namespace kge
