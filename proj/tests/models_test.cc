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

#include "kge/models.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "test_support.h"

namespace kge {
namespace {

using testing::GradientRelativeError;
using testing::kAllKinds;
using testing::NumericGradient;
using testing::RandomParams;

EnergyConfig SmallConfig(Norm norm, bool normalize) {
  EnergyConfig c;
  c.norm = norm;
  c.dim_e = 4;
  c.dim_r = 4;
  c.bases = 3;
  c.normalize_projections = normalize;
  return c;
}

double L2(std::span<const double> x) {
  double s = 0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

class GradientTest
    : public ::testing::TestWithParam<std::tuple<ModelKind, Norm, bool>> {};

TEST_P(GradientTest, MatchesCentralDifferences) {
  const auto [kind, norm, normalize] = GetParam();
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<EntityId> e(0, 4);
  std::uniform_int_distribution<RelationId> r(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const ModelParams p = RandomParams(kind, SmallConfig(norm, normalize), 5,
                                       2, rng);
    const Triple t{e(rng), r(rng), e(rng)};
    const double err =
        GradientRelativeError(GradEnergy(p, t), NumericGradient(p, t, 1e-5));
    // L1 has kinks; the draws above rarely land near one.
    EXPECT_LT(err, norm == Norm::kL2 ? 1e-6 : 1e-4)
        << ModelKindName(kind) << " trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(
    AllModels, GradientTest,
    ::testing::Combine(::testing::ValuesIn(kAllKinds),
                       ::testing::Values(Norm::kL1, Norm::kL2),
                       ::testing::Bool()),
    [](const auto& info) {
      return std::string(ModelKindName(std::get<0>(info.param))) + "_" +
             NormName(std::get<1>(info.param)) +
             (std::get<2>(info.param) ? "_normalized" : "_raw");
    });

TEST(AccumulateGradientTest, EqualsWeightedSumOfSingleGradients) {
  std::mt19937_64 rng(3);
  for (ModelKind kind : kAllKinds) {
    const ModelParams p =
        RandomParams(kind, SmallConfig(Norm::kL2, true), 6, 3, rng);
    std::vector<WeightedTriple> items = {
        {{0, 0, 1}, 1.0}, {{2, 0, 3}, -1.0}, {{1, 1, 4}, 1.0},
        {{5, 2, 0}, -1.0}, {{0, 0, 1}, 1.0}};
    SparseGradient batched;
    AccumulateGradient(p, items, batched);
    SparseGradient reference;
    for (const auto& item : items) {
      reference.Merge(GradEnergy(p, item.triple), item.weight);
    }
    ASSERT_EQ(batched.size(), reference.size()) << ModelKindName(kind);
    for (const auto& [id, g] : reference.blocks()) {
      const auto* b = batched.Find(id);
      ASSERT_NE(b, nullptr) << SliceName(id);
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_NEAR((*b)[i], g[i], 1e-12) << SliceName(id);
      }
    }
  }
}

TEST(EnergyTest, ZeroDistanceHasZeroGradientUnderBothNorms) {
  for (Norm norm : {Norm::kL1, Norm::kL2}) {
    ModelParams p(ModelKind::kTransE, SmallConfig(norm, false), 2, 1);
    p.tensor(TensorId::kEntity).Row(0)[0] = 0.5;
    p.tensor(TensorId::kEntity).Row(1)[0] = 0.5;
    EXPECT_EQ(Energy(p, {0, 0, 1}), 0.0);
    const SparseGradient grad = GradEnergy(p, {0, 0, 1});
    for (const auto& [id, g] : grad.blocks()) {
      for (double v : g) EXPECT_EQ(v, 0.0) << SliceName(id);
    }
  }
}

TEST(EnergyTest, HandComputedTransE) {
  EnergyConfig c = SmallConfig(Norm::kL1, false);
  c.dim_e = c.dim_r = 2;
  ModelParams p(ModelKind::kTransE, c, 2, 1);
  auto h = p.tensor(TensorId::kEntity).Row(0);
  auto t = p.tensor(TensorId::kEntity).Row(1);
  auto r = p.tensor(TensorId::kRelation).Row(0);
  h[0] = 0.1, h[1] = 0.2, t[0] = 0.4, t[1] = -0.1, r[0] = 0.2, r[1] = 0.0;
  // |0.1 + 0.2 - 0.4| + |0.2 - (-0.1)|
  EXPECT_NEAR(Energy(p, {0, 0, 1}), 0.4, 1e-15);
  p.mutable_config().norm = Norm::kL2;
  EXPECT_NEAR(Energy(p, {0, 0, 1}), std::sqrt(0.01 + 0.09), 1e-15);
}

TEST(EnergyTest, NormalizedProjectionsHaveUnitNorm) {
  std::mt19937_64 rng(5);
  for (ModelKind kind : kAllKinds) {
    ModelParams p = RandomParams(kind, SmallConfig(Norm::kL2, true), 3, 1, rng);
    // With a zero relation vector the energy is ||h_p - t_p||; for unit
    // vectors that is at most 2.
    for (double& x : p.tensor(TensorId::kRelation).data) x = 0.0;
    EXPECT_LE(Energy(p, {0, 0, 1}), 2.0 + 1e-12);
    // TransF maps the two sides differently, so only the others vanish.
    if (kind != ModelKind::kTransF) {
      EXPECT_NEAR(Energy(p, {2, 0, 2}), 0.0, 1e-12) << "h = t";
    }
  }
}

TEST(EnergyTest, ZeroProjectionFallsBackAndIsCounted) {
  ResetProjectionFallbackCount();
  ModelParams p(ModelKind::kTransE, SmallConfig(Norm::kL2, true), 2, 1);
  p.tensor(TensorId::kEntity).Row(1)[0] = 1.0;
  // Entity 0 is all zeros.
  const double e = Energy(p, {0, 0, 1});
  EXPECT_TRUE(std::isfinite(e));
  EXPECT_NEAR(e, 1.0, 1e-15);
  EXPECT_EQ(ProjectionFallbackCount(), 1u);
  const SparseGradient grad = GradEnergy(p, {0, 0, 1});
  for (const auto& [id, g] : grad.blocks()) {
    for (double v : g) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(EnergyTest, NonFiniteEnergyThrows) {
  ModelParams p(ModelKind::kTransE, SmallConfig(Norm::kL2, false), 2, 1);
  p.tensor(TensorId::kEntity).Row(0)[0] =
      std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Energy(p, {0, 0, 1}), NumericError);
  EXPECT_THROW(CheckFinite(p), NumericError);
}

TEST(EnergyTest, OutOfRangeIdsThrow) {
  ModelParams p(ModelKind::kTransE, SmallConfig(Norm::kL2, false), 2, 1);
  EXPECT_THROW(Energy(p, {2, 0, 1}), BoundsError);
  EXPECT_THROW(Energy(p, {0, 1, 1}), BoundsError);
  EXPECT_THROW(Energy(p, {0, 0, -1}), BoundsError);
}

TEST(TransFTest, ZeroCoefficientsReduceToTransE) {
  std::mt19937_64 rng(11);
  for (Norm norm : {Norm::kL1, Norm::kL2}) {
    EnergyConfig c = SmallConfig(norm, false);
    c.dim_e = c.dim_r = 8;
    ModelParams e = InitModel(ModelKind::kTransE, c, 20, 3, rng);
    ModelParams f = InitTransFFromTransE(e, c, rng);
    for (EntityId h = 0; h < 20; ++h) {
      for (RelationId r = 0; r < 3; ++r) {
        const Triple t{h, r, (h * 7 + 3) % 20};
        EXPECT_NEAR(Energy(f, t), Energy(e, t), 1e-12);
      }
    }
  }
}

TEST(TransFTest, MatrixEqualsIdentityPlusWeightedBases) {
  std::mt19937_64 rng(2);
  EnergyConfig c = SmallConfig(Norm::kL2, false);
  c.dim_r = 3;
  const ModelParams p = RandomParams(ModelKind::kTransF, c, 4, 2, rng);
  for (Side side : {Side::kHead, Side::kTail}) {
    const auto m = ProjectionMatrix(p, 1, side);
    const auto& basis = p.tensor(side == Side::kHead ? TensorId::kHeadBasis
                                                     : TensorId::kTailBasis);
    const auto coef = p.tensor(side == Side::kHead ? TensorId::kHeadCoef
                                                   : TensorId::kTailCoef)
                          .Row(1);
    for (std::int64_t j = 0; j < 3; ++j) {
      for (std::int64_t k = 0; k < 4; ++k) {
        double want = j == k ? 1.0 : 0.0;
        for (std::int64_t i = 0; i < 3; ++i) {
          want += coef[static_cast<std::size_t>(i)] *
                  basis.Row(i)[static_cast<std::size_t>(j * 4 + k)];
        }
        EXPECT_NEAR(m[static_cast<std::size_t>(j * 4 + k)], want, 1e-15);
      }
    }
  }
}

TEST(TransFTest, FactoredEnergyMatchesMaterialisedMatrices) {
  std::mt19937_64 rng(8);
  EnergyConfig c = SmallConfig(Norm::kL1, true);
  c.dim_e = 6;
  c.dim_r = 5;
  const ModelParams p = RandomParams(ModelKind::kTransF, c, 7, 2, rng);
  std::vector<double> out(7);
  for (Side side : {Side::kHead, Side::kTail}) {
    CandidateEnergies(p, {1, 1, 2}, side, out);
    for (EntityId x = 0; x < 7; ++x) {
      Triple t{1, 1, 2};
      (side == Side::kHead ? t.head : t.tail) = x;
      EXPECT_NEAR(out[static_cast<std::size_t>(x)], Energy(p, t), 1e-10);
    }
  }
}

TEST(CandidateEnergiesTest, BitwiseEqualToEnergyForNonFactoredKinds) {
  std::mt19937_64 rng(9);
  for (ModelKind kind :
       {ModelKind::kTransE, ModelKind::kTransH, ModelKind::kTransR}) {
    const ModelParams p =
        RandomParams(kind, SmallConfig(Norm::kL1, true), 6, 2, rng);
    std::vector<double> out(6);
    CandidateEnergies(p, {2, 1, 3}, Side::kTail, out);
    for (EntityId x = 0; x < 6; ++x) {
      EXPECT_EQ(out[static_cast<std::size_t>(x)], Energy(p, {2, 1, x}));
    }
  }
}

TEST(ParamCountTest, ClosedFormsAtFullScale) {
  EXPECT_EQ(ParamCount(ModelKind::kTransE, 14951, 1345, 100, 100, 0),
            1629600);
  EXPECT_EQ(ParamCount(ModelKind::kTransF, 14951, 1345, 100, 100, 5),
            1743050);
  EXPECT_EQ(ParamCount(ModelKind::kTransR, 14951, 1345, 100, 100, 0),
            15079600);
  EXPECT_EQ(ParamCount(ModelKind::kTransH, 14951, 1345, 100, 100, 0),
            1629600 + 134500);
}

TEST(ParamCountTest, MatchesAllocation) {
  for (ModelKind kind : kAllKinds) {
    EnergyConfig c;
    c.dim_e = 7;
    c.dim_r = kind == ModelKind::kTransR || kind == ModelKind::kTransF ? 5 : 7;
    c.bases = 3;
    const ModelParams p(kind, c, 13, 4);
    EXPECT_EQ(p.NumScalars(),
              ParamCount(kind, 13, 4, c.dim_e, c.dim_r,
                         kind == ModelKind::kTransF ? 3 : 0))
        << ModelKindName(kind);
  }
}

TEST(InitTest, DeterministicForSeedAndSatisfiesConstraints) {
  for (ModelKind kind : kAllKinds) {
    EnergyConfig c;
    c.dim_e = c.dim_r = 8;
    std::mt19937_64 a(42), b(42);
    const ModelParams p = InitModel(kind, c, 10, 3, a);
    const ModelParams q = InitModel(kind, c, 10, 3, b);
    for (TensorId id : p.ActiveTensors()) {
      EXPECT_EQ(p.tensor(id).data, q.tensor(id).data) << TensorName(id);
    }
    for (std::int64_t i = 0; i < 10; ++i) {
      EXPECT_NEAR(L2(p.tensor(TensorId::kEntity).Row(i)), 1.0, 1e-12);
    }
    if (kind == ModelKind::kTransH) {
      for (std::int64_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(L2(p.tensor(TensorId::kNormal).Row(i)), 1.0, 1e-12);
      }
    }
    if (kind == ModelKind::kTransF) {
      for (double x : p.tensor(TensorId::kHeadCoef).data) EXPECT_EQ(x, 0.0);
      for (double x : p.tensor(TensorId::kTailCoef).data) EXPECT_EQ(x, 0.0);
    }
  }
}

TEST(InitTest, TransferRejectsMismatchedDimensions) {
  EnergyConfig c;
  c.dim_e = c.dim_r = 8;
  std::mt19937_64 rng(1);
  const ModelParams e = InitModel(ModelKind::kTransE, c, 4, 2, rng);
  EnergyConfig wrong = c;
  wrong.dim_e = wrong.dim_r = 6;
  EXPECT_THROW(InitTransFFromTransE(e, wrong, rng), DimensionError);
}

TEST(ConstraintsTest, EnforceIsIdempotentAndBounded) {
  std::mt19937_64 rng(4);
  for (ModelKind kind : kAllKinds) {
    ModelParams p =
        RandomParams(kind, SmallConfig(Norm::kL2, true), 6, 3, rng, -2, 2);
    EnforceConstraints(p);
    const ModelParams once = p;
    EnforceConstraints(p);
    for (TensorId id : p.ActiveTensors()) {
      EXPECT_EQ(p.tensor(id).data, once.tensor(id).data) << TensorName(id);
    }
    for (std::int64_t i = 0; i < 6; ++i) {
      EXPECT_LE(L2(p.tensor(TensorId::kEntity).Row(i)), 1.0);
    }
    for (std::int64_t i = 0; i < 3; ++i) {
      EXPECT_LE(L2(p.tensor(TensorId::kRelation).Row(i)), 1.0);
    }
  }
}

TEST(ConstraintsTest, ZeroNormalThrows) {
  ModelParams p(ModelKind::kTransH, SmallConfig(Norm::kL2, true), 2, 1);
  EXPECT_THROW(EnforceConstraints(p), NumericError);
}

TEST(ConfigTest, ValidateRejectsBadShapes) {
  EnergyConfig c;
  c.dim_e = 0;
  EXPECT_THROW(c.Validate(ModelKind::kTransE), UsageError);
  c.dim_e = 4;
  c.dim_r = 3;
  EXPECT_THROW(c.Validate(ModelKind::kTransH), UsageError);
  EXPECT_NO_THROW(c.Validate(ModelKind::kTransR));
  c.bases = 0;
  EXPECT_THROW(c.Validate(ModelKind::kTransF), UsageError);
}

TEST(NamesTest, RoundTrip) {
  for (ModelKind kind : kAllKinds) {
    EXPECT_EQ(ParseModelKind(ModelKindName(kind)), kind);
  }
  EXPECT_EQ(ParseNorm("l2"), Norm::kL2);
  EXPECT_THROW(ParseModelKind("distmult"), UsageError);
  EXPECT_THROW(ParseNorm("l3"), UsageError);
}

}  // namespace
}  // namespace kge
