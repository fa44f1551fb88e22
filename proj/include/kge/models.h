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

// Translation-based energy models.
//
// Every model scores a triple as ||h_p + r - t_p|| where h_p and t_p are the
// head and tail embeddings mapped into the relation space:
//
//   TransE  identity
//   TransH  projection onto the hyperplane with unit normal w_r
//   TransR  a dense relation matrix M_r (d_r x d_e)
//   TransF  M_{r,h} = I + sum_i alpha_r[i] U[i],  M_{r,t} = I + sum_i
//           beta_r[i] V[i], with s bases U, V shared by all relations
//
// With `normalize_projections` the mapped vectors are rescaled to unit L2
// norm before the translation, so ||h_p|| = ||t_p|| = 1 holds exactly.
// Parameters are stored as a fixed set of row-major tensors; the first axis
// of each tensor is the unit of sparse access (an entity, a relation, a
// basis matrix).

#ifndef KGE_MODELS_H_
#define KGE_MODELS_H_

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kge/types.h"

namespace kge {

enum class ModelKind { kTransE, kTransH, kTransR, kTransF };
enum class Norm { kL1, kL2 };

const char* ModelKindName(ModelKind kind);  // "transe", ...
ModelKind ParseModelKind(const std::string& name);
const char* NormName(Norm norm);  // "l1" / "l2"
Norm ParseNorm(const std::string& name);

struct EnergyConfig {
  Norm norm = Norm::kL1;
  std::int32_t dim_e = 50;
  std::int32_t dim_r = 50;
  std::int32_t bases = 5;  // TransF only
  bool normalize_projections = true;

  // Throws UsageError on bad dimensions for `kind`.
  void Validate(ModelKind kind) const;
};

enum class TensorId : std::uint8_t {
  kEntity,
  kRelation,
  kNormal,      // TransH hyperplane normals, Nr x d_e
  kProjection,  // TransR matrices, Nr x (d_r*d_e)
  kHeadBasis,   // TransF U, s x (d_r*d_e)
  kTailBasis,   // TransF V, s x (d_r*d_e)
  kHeadCoef,    // TransF alpha, Nr x s
  kTailCoef,    // TransF beta, Nr x s
};
inline constexpr std::size_t kNumTensors = 8;

const char* TensorName(TensorId id);

struct ParamTensor {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> data;

  void Resize(std::int64_t r, std::int64_t c) {
    rows = r;
    cols = c;
    data.assign(static_cast<std::size_t>(r * c), 0.0);
  }
  std::span<double> Row(std::int64_t i) {
    return {data.data() + i * cols, static_cast<std::size_t>(cols)};
  }
  std::span<const double> Row(std::int64_t i) const {
    return {data.data() + i * cols, static_cast<std::size_t>(cols)};
  }
  bool empty() const { return data.empty(); }
};

// Names one row of one tensor.
struct SliceId {
  TensorId tensor = TensorId::kEntity;
  std::int32_t row = 0;

  friend auto operator<=>(const SliceId&, const SliceId&) = default;
};

std::string SliceName(const SliceId& id);

class ModelParams {
 public:
  ModelParams() = default;
  // Allocates zero-filled tensors of the right shapes.
  ModelParams(ModelKind kind, const EnergyConfig& config,
              std::int32_t num_entities, std::int32_t num_relations);

  ModelKind kind() const { return kind_; }
  const EnergyConfig& config() const { return config_; }
  EnergyConfig& mutable_config() { return config_; }
  std::int32_t num_entities() const { return num_entities_; }
  std::int32_t num_relations() const { return num_relations_; }

  ParamTensor& tensor(TensorId id) {
    return tensors_[static_cast<std::size_t>(id)];
  }
  const ParamTensor& tensor(TensorId id) const {
    return tensors_[static_cast<std::size_t>(id)];
  }
  std::span<double> slice(SliceId id) { return tensor(id.tensor).Row(id.row); }
  std::span<const double> slice(SliceId id) const {
    return tensor(id.tensor).Row(id.row);
  }

  // Tensors used by this kind, in checkpoint order.
  std::vector<TensorId> ActiveTensors() const;
  // Logical shape, e.g. {s, d_r, d_e} for the TransF bases.
  std::vector<std::int64_t> Shape(TensorId id) const;
  // Total number of scalars over the active tensors.
  std::int64_t NumScalars() const;

 private:
  ModelKind kind_ = ModelKind::kTransE;
  EnergyConfig config_;
  std::int32_t num_entities_ = 0;
  std::int32_t num_relations_ = 0;
  std::array<ParamTensor, kNumTensors> tensors_;
};

// Gradient restricted to the parameter rows one or more triples touch.
// Blocks are kept in SliceId order, so iteration is deterministic.
class SparseGradient {
 public:
  // Zero-initialised on first access.
  std::span<double> Block(SliceId id, std::size_t size);
  void Add(SliceId id, std::span<const double> values, double scale = 1.0);
  void Merge(const SparseGradient& other, double scale = 1.0);

  const std::map<SliceId, std::vector<double>>& blocks() const {
    return blocks_;
  }
  const std::vector<double>* Find(SliceId id) const;
  bool empty() const { return blocks_.empty(); }
  std::size_t size() const { return blocks_.size(); }
  void clear() { blocks_.clear(); }

 private:
  std::map<SliceId, std::vector<double>> blocks_;
};

double Energy(const ModelParams& params, const Triple& triple);
SparseGradient GradEnergy(const ModelParams& params, const Triple& triple);

struct WeightedTriple {
  Triple triple;
  double weight = 1.0;
};

// gradient += sum_k weight_k * grad E(triple_k). Equivalent to summing
// GradEnergy up to rounding; TransF materialises each relation's two
// projection matrices once per call instead of once per triple.
void AccumulateGradient(const ModelParams& params,
                        std::span<const WeightedTriple> items,
                        SparseGradient& gradient);

// Energies of (c, r, t) (side = head) or (h, r, c) (side = tail) for every
// entity c, written to `out` (size Ne). Same value as Energy() per candidate
// up to rounding.
void CandidateEnergies(const ModelParams& params, const Triple& triple,
                       Side side, std::span<double> out);

// Dense d_r x d_e matrix mapping entities into relation r's space on the
// given side. TransF builds it from the bases; this is the reference path.
std::vector<double> ProjectionMatrix(const ModelParams& params, RelationId r,
                                     Side side);

// Entity and relation rows rescaled to norm <= 1, TransH normals to norm 1.
// Idempotent. Throws NumericError on a zero normal.
void EnforceConstraints(ModelParams& params, bool bound_entities = true);
// Same rule on the listed rows only; other slices are ignored.
void EnforceConstraints(ModelParams& params, std::span<const SliceId> rows,
                        bool bound_entities = true);

// Throws NumericError naming the first non-finite parameter.
void CheckFinite(const ModelParams& params);

ModelParams InitModel(ModelKind kind, const EnergyConfig& config,
                      std::int32_t num_entities, std::int32_t num_relations,
                      std::mt19937_64& rng);

// TransF whose identity term reproduces `transe`: E and R copied, coefficients
// zero, bases freshly drawn. Requires config.dim_e == config.dim_r ==
// the TransE dimension.
ModelParams InitTransFFromTransE(const ModelParams& transe,
                                 const EnergyConfig& config,
                                 std::mt19937_64& rng);

std::int64_t ParamCount(ModelKind kind, std::int64_t num_entities,
                        std::int64_t num_relations, std::int64_t dim_e,
                        std::int64_t dim_r, std::int64_t bases);

// Number of times a zero-length projected vector fell back to the
// un-normalised branch (process-wide, thread-safe).
std::uint64_t ProjectionFallbackCount();
void ResetProjectionFallbackCount();

}  // namespace kge

#endif  // KGE_MODELS_H_
