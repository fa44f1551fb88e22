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

#include <gtest/gtest.h>

#include "test_support.h"

namespace kge {
namespace {

constexpr TiePolicy kPolicies[] = {TiePolicy::kMean, TiePolicy::kOptimistic,
                                   TiePolicy::kPessimistic};

TEST(RankFromEnergiesTest, TiePolicies) {
  const std::vector<double> e = {0.5, 1.0, 1.0, 0.2, 1.0, 3.0};
  // Target 1: one lower (0.5), one more lower (0.2), two ties.
  EXPECT_EQ(RankFromEnergies(e, 1, {}, TiePolicy::kOptimistic), 3.0);
  EXPECT_EQ(RankFromEnergies(e, 1, {}, TiePolicy::kPessimistic), 5.0);
  EXPECT_EQ(RankFromEnergies(e, 1, {}, TiePolicy::kMean), 4.0);
  EXPECT_EQ(RankFromEnergies(e, 3, {}, TiePolicy::kMean), 1.0);
}

TEST(RankFromEnergiesTest, ExclusionNeverRemovesTarget) {
  const std::vector<double> e = {0.5, 1.0, 1.0, 0.2};
  const bool excluded[] = {true, false, true, false};
  EXPECT_EQ(RankFromEnergies(e, 1, excluded, TiePolicy::kPessimistic), 2.0);
  const bool bad[] = {false, true, false, false};
  EXPECT_THROW(RankFromEnergies(e, 1, bad, TiePolicy::kMean), InternalError);
  EXPECT_THROW(RankFromEnergies(e, 9, {}, TiePolicy::kMean), InternalError);
}

TEST(RankFromEnergiesTest, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> q(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> e(12), f(12);
    for (std::size_t i = 0; i < e.size(); ++i) {
      e[i] = q(rng) * 0.25;
      f[i] = std::exp(3 * e[i]) - 7;
    }
    for (TiePolicy p : kPolicies) {
      EXPECT_EQ(RankFromEnergies(e, 4, {}, p), RankFromEnergies(f, 4, {}, p));
    }
  }
}

TEST(MetricsTest, HandComputed) {
  const std::vector<double> ranks = {1, 2, 4};
  const RankMetrics m = MetricsFromRanks(ranks);
  EXPECT_EQ(m.count, 3);
  EXPECT_DOUBLE_EQ(m.mr, 7.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.mrr, (1 + 0.5 + 0.25) / 3);
  EXPECT_DOUBLE_EQ(m.hits_at(1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.hits_at(3), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.hits_at(10), 1.0);
  EXPECT_EQ(MetricsFromRanks({}).count, 0);
}

// Parameters with few distinct values so energies tie often.
ModelParams QuantizedParams(ModelKind kind, std::mt19937_64& rng) {
  EnergyConfig c;
  c.dim_e = c.dim_r = 3;
  c.bases = 2;
  c.norm = Norm::kL1;
  c.normalize_projections = false;
  ModelParams p(kind, c, 8, 2);
  std::uniform_int_distribution<int> q(-2, 2);
  for (TensorId id : p.ActiveTensors()) {
    for (double& x : p.tensor(id).data) x = q(rng) * 0.25;
  }
  return p;
}

TEST(RankCandidatesTest, MatchesBruteForceIncludingTies) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<EntityId> e(0, 7);
  std::uniform_int_distribution<RelationId> r(0, 1);
  int ties_seen = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const ModelKind kind =
        testing::kAllKinds[static_cast<std::size_t>(trial) % 3];
    const ModelParams p = QuantizedParams(kind, rng);
    KnownTripleIndex known;
    for (int k = 0; k < 20; ++k) known.Insert({e(rng), r(rng), e(rng)});
    const Triple t{e(rng), r(rng), e(rng)};
    known.Insert(t);
    for (Side side : {Side::kHead, Side::kTail}) {
      for (bool filtered : {false, true}) {
        for (TiePolicy policy : kPolicies) {
          EXPECT_EQ(RankCandidates(p, t, side, known, filtered, policy),
                    testing::BruteForceRank(p, t, side, known, filtered,
                                            policy));
        }
        if (RankCandidates(p, t, side, known, filtered,
                           TiePolicy::kOptimistic) !=
            RankCandidates(p, t, side, known, filtered,
                           TiePolicy::kPessimistic)) {
          ++ties_seen;
        }
      }
    }
  }
  EXPECT_GT(ties_seen, 50);
}

TEST(RankCandidatesTest, FilteredNeverWorseThanRaw) {
  std::mt19937_64 rng(8);
  const Dataset d = testing::TinyDataset(10, 2);
  const KnownTripleIndex known = BuildKnownIndex(d);
  for (ModelKind kind : testing::kAllKinds) {
    EnergyConfig c;
    c.dim_e = c.dim_r = 4;
    c.bases = 2;
    const ModelParams p = InitModel(kind, c, 10, 4, rng);
    for (const Triple& t : d.test) {
      for (Side side : {Side::kHead, Side::kTail}) {
        EXPECT_LE(RankCandidates(p, t, side, known, true),
                  RankCandidates(p, t, side, known, false));
      }
    }
  }
}

TEST(EvaluateTest, FullReportMatchesBruteForce) {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Dataset d = testing::TinyDataset(10, seed);
    const KnownTripleIndex known = BuildKnownIndex(d);
    for (ModelKind kind : testing::kAllKinds) {
      EnergyConfig c;
      c.dim_e = c.dim_r = 4;
      c.bases = 2;
      const ModelParams p =
          testing::RandomParams(kind, c, 10, 4, rng);
      for (TiePolicy policy : kPolicies) {
        EvalOptions options;
        options.tie_policy = policy;
        const EvalReport report = EvaluateLinkPrediction(p, d, known, options);
        const auto want = testing::BruteForceReport(p, d, policy);
        const auto got = FlattenReport(report);
        ASSERT_EQ(got.size(), want.size());
        for (const auto& [key, value] : got) {
          ASSERT_TRUE(want.contains(key)) << key;
          EXPECT_NEAR(value, want.at(key), 1e-12)
              << key << " " << ModelKindName(kind);
        }
      }
    }
  }
}

TEST(EvaluateTest, PerfectModelScoresOne) {
  // One relation, identity-like embeddings: h + r == t exactly for the test
  // triple and nothing else is as close.
  Dataset d;
  for (int i = 0; i < 4; ++i) d.vocabulary.AddEntity("e" + std::to_string(i));
  d.vocabulary.AddRelation("next");
  d.train = {{0, 0, 1}, {1, 0, 2}};
  d.test = {{2, 0, 3}};
  EnergyConfig c;
  c.dim_e = c.dim_r = 1;
  c.normalize_projections = false;
  ModelParams p(ModelKind::kTransE, c, 4, 1);
  for (int i = 0; i < 4; ++i) p.tensor(TensorId::kEntity).Row(i)[0] = i;
  p.tensor(TensorId::kRelation).Row(0)[0] = 1;
  const EvalReport r = EvaluateLinkPrediction(p, d, BuildKnownIndex(d));
  EXPECT_EQ(r.filtered.overall.mr, 1.0);
  EXPECT_EQ(r.filtered.overall.mrr, 1.0);
  EXPECT_EQ(r.filtered.overall.hits_at(1), 1.0);
  EXPECT_EQ(r.num_triples, 1);
}

TEST(EvaluateTest, PureAndThreadIndependent) {
  const Dataset d = testing::TinyDataset(10, 3);
  const KnownTripleIndex known = BuildKnownIndex(d);
  std::mt19937_64 rng(2);
  EnergyConfig c;
  c.dim_e = c.dim_r = 4;
  c.bases = 2;
  const ModelParams p = InitModel(ModelKind::kTransF, c, 10, 4, rng);
  EvalOptions one, four;
  four.threads = 4;
  EXPECT_EQ(FormatReport(EvaluateLinkPrediction(p, d, known, one)),
            FormatReport(EvaluateLinkPrediction(p, d, known, one)));
  EXPECT_EQ(FormatReport(EvaluateLinkPrediction(p, d, known, one)),
            FormatReport(EvaluateLinkPrediction(p, d, known, four)));
}

TEST(EvaluateTest, ReportKeys) {
  const Dataset d = testing::TinyDataset(10, 3);
  std::mt19937_64 rng(2);
  EnergyConfig c;
  c.dim_e = c.dim_r = 4;
  const ModelParams p = InitModel(ModelKind::kTransE, c, 10, 4, rng);
  const std::string text =
      FormatReport(EvaluateLinkPrediction(p, d, BuildKnownIndex(d)));
  EXPECT_EQ(text.rfind("tie_policy\tmean\n", 0), 0u);
  for (const char* key :
       {"\nraw.mr\t", "\nfiltered.mrr\t", "\nfiltered.hits@10\t",
        "\nfiltered.hep.N-1.hits@10\t", "\nfiltered.tep.1-N.count\t",
        "\nraw.head.hits@3\t"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
}

TEST(TiePolicyTest, Names) {
  for (TiePolicy p : kPolicies) EXPECT_EQ(ParseTiePolicy(TiePolicyName(p)), p);
  EXPECT_THROW(ParseTiePolicy("random"), UsageError);
}

}  // namespace
}  // namespace kge
