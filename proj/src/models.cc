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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace kge {
namespace {

// Projected vectors at or below this norm are not normalised.
constexpr double kMinProjectionNorm = 1e-12;

std::atomic<std::uint64_t> g_projection_fallbacks{0};

double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double L2(std::span<const double> a) { return std::sqrt(Dot(a, a)); }

// out = M x, M is rows x cols row-major.
void MatVec(std::span<const double> m, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out) {
  for (std::size_t j = 0; j < rows; ++j) {
    out[j] = Dot(m.subspan(j * cols, cols), x);
  }
}

// out += scale * M^T g.
void MatTVecAdd(std::span<const double> m, std::size_t rows, std::size_t cols,
                std::span<const double> g, double scale,
                std::span<double> out) {
  for (std::size_t j = 0; j < rows; ++j) {
    const double gj = scale * g[j];
    if (gj == 0.0) continue;
    const double* row = m.data() + j * cols;
    for (std::size_t k = 0; k < cols; ++k) out[k] += gj * row[k];
  }
}

// block += scale * g x^T.
void OuterAdd(std::span<const double> g, std::span<const double> x,
              double scale, std::span<double> block) {
  const std::size_t cols = x.size();
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double gj = scale * g[j];
    if (gj == 0.0) continue;
    double* row = block.data() + j * cols;
    for (std::size_t k = 0; k < cols; ++k) row[k] += gj * x[k];
  }
}

void Axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void CheckTriple(const ModelParams& p, const Triple& t) {
  if (t.head < 0 || t.head >= p.num_entities() || t.tail < 0 ||
      t.tail >= p.num_entities() || t.relation < 0 ||
      t.relation >= p.num_relations()) {
    throw BoundsError("triple (" + std::to_string(t.head) + ", " +
                      std::to_string(t.relation) + ", " +
                      std::to_string(t.tail) + ") outside model of " +
                      std::to_string(p.num_entities()) + " entities and " +
                      std::to_string(p.num_relations()) + " relations");
  }
}

TensorId BasisTensor(Side side) {
  return side == Side::kHead ? TensorId::kHeadBasis : TensorId::kTailBasis;
}
TensorId CoefTensor(Side side) {
  return side == Side::kHead ? TensorId::kHeadCoef : TensorId::kTailCoef;
}

// Entity mapped into the relation space on one side of a triple.
struct Mapped {
  std::vector<double> projected;  // before normalisation
  std::vector<double> value;      // what enters the translation
  double norm = 0.0;
  bool normalized = false;
  std::vector<double> basis_images;  // TransF: U[i] x, s x d_r
};

void Project(const ModelParams& p, RelationId r, Side side,
             std::span<const double> x, Mapped& out) {
  const auto& cfg = p.config();
  const auto dr = static_cast<std::size_t>(cfg.dim_r);
  const auto de = static_cast<std::size_t>(cfg.dim_e);
  out.projected.assign(dr, 0.0);
  switch (p.kind()) {
    case ModelKind::kTransE:
      std::copy(x.begin(), x.end(), out.projected.begin());
      break;
    case ModelKind::kTransH: {
      auto w = p.tensor(TensorId::kNormal).Row(r);
      const double wx = Dot(w, x);
      for (std::size_t k = 0; k < de; ++k) out.projected[k] = x[k] - wx * w[k];
      break;
    }
    case ModelKind::kTransR:
      MatVec(p.tensor(TensorId::kProjection).Row(r), dr, de, x,
             out.projected);
      break;
    case ModelKind::kTransF: {
      const auto s = static_cast<std::size_t>(cfg.bases);
      const auto& basis = p.tensor(BasisTensor(side));
      auto coef = p.tensor(CoefTensor(side)).Row(r);
      for (std::size_t j = 0; j < std::min(dr, de); ++j) {
        out.projected[j] = x[j];
      }
      out.basis_images.assign(s * dr, 0.0);
      for (std::size_t i = 0; i < s; ++i) {
        std::span<double> image(out.basis_images.data() + i * dr, dr);
        MatVec(basis.Row(static_cast<std::int64_t>(i)), dr, de, x, image);
        Axpy(coef[i], image, out.projected);
      }
      break;
    }
  }
}

void Normalize(bool enabled, Mapped& m) {
  m.normalized = false;
  if (!enabled) {
    m.value = m.projected;
    return;
  }
  m.norm = L2(m.projected);
  if (!(m.norm > kMinProjectionNorm)) {
    g_projection_fallbacks.fetch_add(1, std::memory_order_relaxed);
    m.value = m.projected;
    return;
  }
  m.normalized = true;
  m.value.resize(m.projected.size());
  for (std::size_t k = 0; k < m.projected.size(); ++k) {
    m.value[k] = m.projected[k] / m.norm;
  }
}

// Gradient w.r.t. the un-normalised projection, given the gradient w.r.t.
// the value that entered the translation.
std::vector<double> BackpropNormalize(const Mapped& m,
                                      std::vector<double> grad_value) {
  if (!m.normalized) return grad_value;
  const double along = Dot(m.value, grad_value);
  for (std::size_t k = 0; k < grad_value.size(); ++k) {
    grad_value[k] = (grad_value[k] - m.value[k] * along) / m.norm;
  }
  return grad_value;
}

double Distance(Norm norm, std::span<const double> hv, std::span<const double> r,
                std::span<const double> tv, std::vector<double>* diff) {
  double acc = 0.0;
  if (diff != nullptr) diff->resize(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double d = hv[k] + r[k] - tv[k];
    if (diff != nullptr) (*diff)[k] = d;
    acc += norm == Norm::kL1 ? std::abs(d) : d * d;
  }
  return norm == Norm::kL1 ? acc : std::sqrt(acc);
}

// dE/d(diff).
std::vector<double> DistanceGradient(Norm norm, const std::vector<double>& diff,
                                     double energy) {
  std::vector<double> g(diff.size(), 0.0);
  if (norm == Norm::kL1) {
    for (std::size_t k = 0; k < diff.size(); ++k) g[k] = Sign(diff[k]);
  } else if (energy > 0.0) {
    for (std::size_t k = 0; k < diff.size(); ++k) g[k] = diff[k] / energy;
  }
  return g;
}

double CheckedEnergy(double e, const Triple& t) {
  if (!std::isfinite(e)) {
    throw NumericError("non-finite energy for triple (" +
                       std::to_string(t.head) + ", " +
                       std::to_string(t.relation) + ", " +
                       std::to_string(t.tail) + ")");
  }
  return e;
}

// Chain rule from the projection output back to the entity row and the
// side's projection parameters.
void BackpropProject(const ModelParams& p, RelationId r, Side side,
                     std::span<const double> x, const Mapped& m,
                     std::span<const double> g, double scale,
                     std::span<double> grad_x, SparseGradient& grad) {
  const auto& cfg = p.config();
  const auto dr = static_cast<std::size_t>(cfg.dim_r);
  const auto de = static_cast<std::size_t>(cfg.dim_e);
  switch (p.kind()) {
    case ModelKind::kTransE:
      Axpy(scale, g, grad_x);
      break;
    case ModelKind::kTransH: {
      auto w = p.tensor(TensorId::kNormal).Row(r);
      const double wg = Dot(w, g);
      const double wx = Dot(w, x);
      for (std::size_t k = 0; k < de; ++k) {
        grad_x[k] += scale * (g[k] - wg * w[k]);
      }
      auto gw = grad.Block({TensorId::kNormal, r}, de);
      for (std::size_t k = 0; k < de; ++k) {
        gw[k] -= scale * (wx * g[k] + wg * x[k]);
      }
      break;
    }
    case ModelKind::kTransR: {
      auto m_r = p.tensor(TensorId::kProjection).Row(r);
      MatTVecAdd(m_r, dr, de, g, scale, grad_x);
      OuterAdd(g, x, scale, grad.Block({TensorId::kProjection, r}, dr * de));
      break;
    }
    case ModelKind::kTransF: {
      const auto s = static_cast<std::size_t>(cfg.bases);
      const auto& basis = p.tensor(BasisTensor(side));
      auto coef = p.tensor(CoefTensor(side)).Row(r);
      for (std::size_t j = 0; j < std::min(dr, de); ++j) {
        grad_x[j] += scale * g[j];
      }
      auto gc = grad.Block({CoefTensor(side), r}, s);
      for (std::size_t i = 0; i < s; ++i) {
        const auto row = static_cast<std::int32_t>(i);
        MatTVecAdd(basis.Row(row), dr, de, g, scale * coef[i], grad_x);
        gc[i] += scale * Dot(g, std::span<const double>(
                                    m.basis_images.data() + i * dr, dr));
        OuterAdd(g, x, scale * coef[i],
                 grad.Block({BasisTensor(side), row}, dr * de));
      }
      break;
    }
  }
}

void AccumulateTriple(const ModelParams& p, const Triple& t, double scale,
                      SparseGradient& grad) {
  CheckTriple(p, t);
  const auto& cfg = p.config();
  const auto de = static_cast<std::size_t>(cfg.dim_e);
  const auto& ent = p.tensor(TensorId::kEntity);
  auto h = ent.Row(t.head);
  auto tl = ent.Row(t.tail);
  auto rv = p.tensor(TensorId::kRelation).Row(t.relation);

  Mapped mh, mt;
  Project(p, t.relation, Side::kHead, h, mh);
  Project(p, t.relation, Side::kTail, tl, mt);
  Normalize(cfg.normalize_projections, mh);
  Normalize(cfg.normalize_projections, mt);
  std::vector<double> diff;
  const double e =
      CheckedEnergy(Distance(cfg.norm, mh.value, rv, mt.value, &diff), t);
  std::vector<double> gd = DistanceGradient(cfg.norm, diff, e);

  grad.Add({TensorId::kRelation, t.relation}, gd, scale);
  std::vector<double> neg_gd(gd.size());
  for (std::size_t k = 0; k < gd.size(); ++k) neg_gd[k] = -gd[k];
  const std::vector<double> g_head = BackpropNormalize(mh, gd);
  const std::vector<double> g_tail = BackpropNormalize(mt, neg_gd);

  // Head and tail may be the same entity; both add into one block.
  auto gh = grad.Block({TensorId::kEntity, t.head}, de);
  BackpropProject(p, t.relation, Side::kHead, h, mh, g_head, scale, gh, grad);
  auto gt = grad.Block({TensorId::kEntity, t.tail}, de);
  BackpropProject(p, t.relation, Side::kTail, tl, mt, g_tail, scale, gt, grad);
}

// TransF batch path: all triples of one relation share M_{r,h}, M_{r,t}.
void AccumulateTransFGroup(const ModelParams& p, RelationId r,
                           std::span<const WeightedTriple* const> items,
                           SparseGradient& grad) {
  const auto& cfg = p.config();
  const auto de = static_cast<std::size_t>(cfg.dim_e);
  const auto dr = static_cast<std::size_t>(cfg.dim_r);
  const auto s = static_cast<std::size_t>(cfg.bases);
  const std::vector<double> mat_h = ProjectionMatrix(p, r, Side::kHead);
  const std::vector<double> mat_t = ProjectionMatrix(p, r, Side::kTail);
  std::vector<double> outer_h(dr * de, 0.0), outer_t(dr * de, 0.0);
  const auto& ent = p.tensor(TensorId::kEntity);
  auto rv = p.tensor(TensorId::kRelation).Row(r);
  auto grad_r = grad.Block({TensorId::kRelation, r}, dr);

  Mapped mh, mt;
  std::vector<double> diff;
  for (const WeightedTriple* item : items) {
    const Triple& t = item->triple;
    CheckTriple(p, t);
    const double w = item->weight;
    auto h = ent.Row(t.head);
    auto tl = ent.Row(t.tail);
    mh.projected.assign(dr, 0.0);
    mt.projected.assign(dr, 0.0);
    MatVec(mat_h, dr, de, h, mh.projected);
    MatVec(mat_t, dr, de, tl, mt.projected);
    Normalize(cfg.normalize_projections, mh);
    Normalize(cfg.normalize_projections, mt);
    const double e =
        CheckedEnergy(Distance(cfg.norm, mh.value, rv, mt.value, &diff), t);
    std::vector<double> gd = DistanceGradient(cfg.norm, diff, e);
    Axpy(w, gd, grad_r);
    std::vector<double> neg_gd(gd.size());
    for (std::size_t k = 0; k < gd.size(); ++k) neg_gd[k] = -gd[k];
    const std::vector<double> g_head = BackpropNormalize(mh, gd);
    const std::vector<double> g_tail = BackpropNormalize(mt, neg_gd);
    MatTVecAdd(mat_h, dr, de, g_head, w,
               grad.Block({TensorId::kEntity, t.head}, de));
    MatTVecAdd(mat_t, dr, de, g_tail, w,
               grad.Block({TensorId::kEntity, t.tail}, de));
    OuterAdd(g_head, h, w, outer_h);
    OuterAdd(g_tail, tl, w, outer_t);
  }

  for (Side side : {Side::kHead, Side::kTail}) {
    const auto& outer = side == Side::kHead ? outer_h : outer_t;
    const auto& basis = p.tensor(BasisTensor(side));
    auto coef = p.tensor(CoefTensor(side)).Row(r);
    auto gc = grad.Block({CoefTensor(side), r}, s);
    for (std::size_t i = 0; i < s; ++i) {
      const auto row = static_cast<std::int32_t>(i);
      gc[i] += Dot(basis.Row(row), outer);
      Axpy(coef[i], outer, grad.Block({BasisTensor(side), row}, dr * de));
    }
  }
}

void ClampRow(std::span<double> row) {
  const double n = L2(row);
  if (!(n > 1.0)) return;
  for (double& v : row) v /= n;
  // Rounding can leave the norm a few ulps above 1; shrink until it is not,
  // so a second pass is a no-op.
  while (L2(row) > 1.0) {
    for (double& v : row) v *= 1.0 - 1e-15;
  }
}

void UnitRow(std::span<double> row, std::int64_t index) {
  const double n = L2(row);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw NumericError("hyperplane normal " + std::to_string(index) +
                       " has zero or non-finite norm");
  }
  if (std::abs(n - 1.0) <= 1e-12) return;
  for (double& v : row) v /= n;
}

void FillUniform(std::span<double> values, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : values) v = dist(rng);
}

void InitUnitRows(ParamTensor& t, double bound, std::mt19937_64& rng) {
  for (std::int64_t i = 0; i < t.rows; ++i) {
    auto row = t.Row(i);
    FillUniform(row, bound, rng);
    const double n = L2(row);
    for (double& v : row) v /= n;
  }
}

void FillRectIdentity(std::span<double> m, std::size_t rows,
                      std::size_t cols) {
  std::fill(m.begin(), m.end(), 0.0);
  for (std::size_t j = 0; j < std::min(rows, cols); ++j) m[j * cols + j] = 1.0;
}

}  // namespace

const char* ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTransE:
      return "transe";
    case ModelKind::kTransH:
      return "transh";
    case ModelKind::kTransR:
      return "transr";
    case ModelKind::kTransF:
      return "transf";
  }
  return "?";
}

ModelKind ParseModelKind(const std::string& name) {
  for (ModelKind k : {ModelKind::kTransE, ModelKind::kTransH,
                      ModelKind::kTransR, ModelKind::kTransF}) {
    if (name == ModelKindName(k)) return k;
  }
  throw UsageError("unknown model kind '" + name + "'");
}

const char* NormName(Norm norm) { return norm == Norm::kL1 ? "l1" : "l2"; }

Norm ParseNorm(const std::string& name) {
  if (name == "l1") return Norm::kL1;
  if (name == "l2") return Norm::kL2;
  throw UsageError("unknown norm '" + name + "'");
}

void EnergyConfig::Validate(ModelKind kind) const {
  if (dim_e < 1 || dim_r < 1) {
    throw UsageError("dimensions must be >= 1");
  }
  if ((kind == ModelKind::kTransE || kind == ModelKind::kTransH) &&
      dim_r != dim_e) {
    throw UsageError(std::string(ModelKindName(kind)) +
                     " requires dim_r == dim_e");
  }
  if (kind == ModelKind::kTransF && bases < 1) {
    throw UsageError("transf requires at least one basis");
  }
}

const char* TensorName(TensorId id) {
  switch (id) {
    case TensorId::kEntity:
      return "entity";
    case TensorId::kRelation:
      return "relation";
    case TensorId::kNormal:
      return "normal";
    case TensorId::kProjection:
      return "projection";
    case TensorId::kHeadBasis:
      return "head_basis";
    case TensorId::kTailBasis:
      return "tail_basis";
    case TensorId::kHeadCoef:
      return "head_coef";
    case TensorId::kTailCoef:
      return "tail_coef";
  }
  return "?";
}

std::string SliceName(const SliceId& id) {
  return std::string(TensorName(id.tensor)) + "[" + std::to_string(id.row) +
         "]";
}

ModelParams::ModelParams(ModelKind kind, const EnergyConfig& config,
                         std::int32_t num_entities,
                         std::int32_t num_relations)
    : kind_(kind),
      config_(config),
      num_entities_(num_entities),
      num_relations_(num_relations) {
  config.Validate(kind);
  if (kind != ModelKind::kTransF) config_.bases = 0;
  for (TensorId id : ActiveTensors()) {
    auto shape = Shape(id);
    std::int64_t cols = 1;
    for (std::size_t k = 1; k < shape.size(); ++k) cols *= shape[k];
    tensor(id).Resize(shape[0], cols);
  }
}

std::vector<TensorId> ModelParams::ActiveTensors() const {
  switch (kind_) {
    case ModelKind::kTransE:
      return {TensorId::kEntity, TensorId::kRelation};
    case ModelKind::kTransH:
      return {TensorId::kEntity, TensorId::kRelation, TensorId::kNormal};
    case ModelKind::kTransR:
      return {TensorId::kEntity, TensorId::kRelation, TensorId::kProjection};
    case ModelKind::kTransF:
      return {TensorId::kEntity,    TensorId::kRelation,
              TensorId::kHeadBasis, TensorId::kTailBasis,
              TensorId::kHeadCoef,  TensorId::kTailCoef};
  }
  return {};
}

std::vector<std::int64_t> ModelParams::Shape(TensorId id) const {
  const std::int64_t ne = num_entities_, nr = num_relations_;
  const std::int64_t de = config_.dim_e, dr = config_.dim_r;
  const std::int64_t s = config_.bases;
  switch (id) {
    case TensorId::kEntity:
      return {ne, de};
    case TensorId::kRelation:
      return {nr, dr};
    case TensorId::kNormal:
      return {nr, de};
    case TensorId::kProjection:
      return {nr, dr, de};
    case TensorId::kHeadBasis:
    case TensorId::kTailBasis:
      return {s, dr, de};
    case TensorId::kHeadCoef:
    case TensorId::kTailCoef:
      return {nr, s};
  }
  return {};
}

std::int64_t ModelParams::NumScalars() const {
  std::int64_t n = 0;
  for (TensorId id : ActiveTensors()) {
    n += static_cast<std::int64_t>(tensor(id).data.size());
  }
  return n;
}

std::span<double> SparseGradient::Block(SliceId id, std::size_t size) {
  auto [it, inserted] = blocks_.try_emplace(id);
  if (inserted) {
    it->second.assign(size, 0.0);
  } else if (it->second.size() != size) {
    throw InternalError("gradient block " + SliceName(id) +
                        " requested with inconsistent size");
  }
  return it->second;
}

void SparseGradient::Add(SliceId id, std::span<const double> values,
                         double scale) {
  Axpy(scale, values, Block(id, values.size()));
}

void SparseGradient::Merge(const SparseGradient& other, double scale) {
  for (const auto& [id, block] : other.blocks_) Add(id, block, scale);
}

const std::vector<double>* SparseGradient::Find(SliceId id) const {
  auto it = blocks_.find(id);
  return it == blocks_.end() ? nullptr : &it->second;
}

double Energy(const ModelParams& params, const Triple& triple) {
  CheckTriple(params, triple);
  const auto& cfg = params.config();
  const auto& ent = params.tensor(TensorId::kEntity);
  Mapped mh, mt;
  Project(params, triple.relation, Side::kHead, ent.Row(triple.head), mh);
  Project(params, triple.relation, Side::kTail, ent.Row(triple.tail), mt);
  Normalize(cfg.normalize_projections, mh);
  Normalize(cfg.normalize_projections, mt);
  return CheckedEnergy(
      Distance(cfg.norm, mh.value,
               params.tensor(TensorId::kRelation).Row(triple.relation),
               mt.value, nullptr),
      triple);
}

SparseGradient GradEnergy(const ModelParams& params, const Triple& triple) {
  SparseGradient grad;
  AccumulateTriple(params, triple, 1.0, grad);
  return grad;
}

void AccumulateGradient(const ModelParams& params,
                        std::span<const WeightedTriple> items,
                        SparseGradient& gradient) {
  if (params.kind() != ModelKind::kTransF) {
    for (const WeightedTriple& item : items) {
      AccumulateTriple(params, item.triple, item.weight, gradient);
    }
    return;
  }
  std::map<RelationId, std::vector<const WeightedTriple*>> groups;
  for (const WeightedTriple& item : items) {
    groups[item.triple.relation].push_back(&item);
  }
  for (const auto& [r, group] : groups) {
    AccumulateTransFGroup(params, r, group, gradient);
  }
}

void CandidateEnergies(const ModelParams& params, const Triple& triple,
                       Side side, std::span<double> out) {
  CheckTriple(params, triple);
  if (out.size() != static_cast<std::size_t>(params.num_entities())) {
    throw InternalError("candidate buffer size mismatch");
  }
  const auto& cfg = params.config();
  const auto de = static_cast<std::size_t>(cfg.dim_e);
  const auto dr = static_cast<std::size_t>(cfg.dim_r);
  const auto& ent = params.tensor(TensorId::kEntity);
  auto rv = params.tensor(TensorId::kRelation).Row(triple.relation);

  // The known side is mapped once.
  const Side fixed_side = side == Side::kHead ? Side::kTail : Side::kHead;
  const EntityId fixed = side == Side::kHead ? triple.tail : triple.head;
  Mapped known;
  Project(params, triple.relation, fixed_side, ent.Row(fixed), known);
  Normalize(cfg.normalize_projections, known);

  const bool dense = params.kind() == ModelKind::kTransR ||
                     params.kind() == ModelKind::kTransF;
  std::vector<double> matrix;
  if (dense) matrix = ProjectionMatrix(params, triple.relation, side);

  Mapped cand;
  for (std::int32_t c = 0; c < params.num_entities(); ++c) {
    if (dense) {
      cand.projected.assign(dr, 0.0);
      MatVec(matrix, dr, de, ent.Row(c), cand.projected);
    } else {
      Project(params, triple.relation, side, ent.Row(c), cand);
    }
    Normalize(cfg.normalize_projections, cand);
    const double e = side == Side::kHead
                         ? Distance(cfg.norm, cand.value, rv, known.value,
                                    nullptr)
                         : Distance(cfg.norm, known.value, rv, cand.value,
                                    nullptr);
    out[static_cast<std::size_t>(c)] = CheckedEnergy(e, triple);
  }
}

std::vector<double> ProjectionMatrix(const ModelParams& params, RelationId r,
                                     Side side) {
  if (r < 0 || r >= params.num_relations()) {
    throw BoundsError("relation id " + std::to_string(r) + " out of range");
  }
  const auto& cfg = params.config();
  const auto de = static_cast<std::size_t>(cfg.dim_e);
  const auto dr = static_cast<std::size_t>(cfg.dim_r);
  std::vector<double> m(dr * de, 0.0);
  switch (params.kind()) {
    case ModelKind::kTransE:
      FillRectIdentity(m, dr, de);
      break;
    case ModelKind::kTransH: {
      auto w = params.tensor(TensorId::kNormal).Row(r);
      FillRectIdentity(m, dr, de);
      for (std::size_t j = 0; j < dr; ++j) {
        for (std::size_t k = 0; k < de; ++k) m[j * de + k] -= w[j] * w[k];
      }
      break;
    }
    case ModelKind::kTransR: {
      auto src = params.tensor(TensorId::kProjection).Row(r);
      std::copy(src.begin(), src.end(), m.begin());
      break;
    }
    case ModelKind::kTransF: {
      FillRectIdentity(m, dr, de);
      const auto& basis = params.tensor(BasisTensor(side));
      auto coef = params.tensor(CoefTensor(side)).Row(r);
      for (std::int32_t i = 0; i < cfg.bases; ++i) {
        Axpy(coef[static_cast<std::size_t>(i)], basis.Row(i), m);
      }
      break;
    }
  }
  return m;
}

void EnforceConstraints(ModelParams& params, bool bound_entities) {
  auto& ent = params.tensor(TensorId::kEntity);
  if (bound_entities) {
    for (std::int64_t i = 0; i < ent.rows; ++i) ClampRow(ent.Row(i));
  }
  auto& rel = params.tensor(TensorId::kRelation);
  for (std::int64_t i = 0; i < rel.rows; ++i) ClampRow(rel.Row(i));
  if (params.kind() == ModelKind::kTransH) {
    auto& normal = params.tensor(TensorId::kNormal);
    for (std::int64_t i = 0; i < normal.rows; ++i) UnitRow(normal.Row(i), i);
  }
}

void EnforceConstraints(ModelParams& params, std::span<const SliceId> rows,
                        bool bound_entities) {
  for (const SliceId& id : rows) {
    switch (id.tensor) {
      case TensorId::kEntity:
        if (bound_entities) ClampRow(params.slice(id));
        break;
      case TensorId::kRelation:
        ClampRow(params.slice(id));
        break;
      case TensorId::kNormal:
        if (params.kind() == ModelKind::kTransH) {
          UnitRow(params.slice(id), id.row);
        }
        break;
      default:
        break;
    }
  }
}

void CheckFinite(const ModelParams& params) {
  for (TensorId id : params.ActiveTensors()) {
    const auto& t = params.tensor(id);
    for (std::size_t k = 0; k < t.data.size(); ++k) {
      if (!std::isfinite(t.data[k])) {
        throw NumericError(std::string("non-finite value in ") +
                           TensorName(id) + " row " +
                           std::to_string(static_cast<std::int64_t>(k) /
                                          std::max<std::int64_t>(t.cols, 1)));
      }
    }
  }
}

ModelParams InitModel(ModelKind kind, const EnergyConfig& config,
                      std::int32_t num_entities, std::int32_t num_relations,
                      std::mt19937_64& rng) {
  if (num_entities < 1 || num_relations < 1) {
    throw UsageError("model needs at least one entity and one relation");
  }
  ModelParams p(kind, config, num_entities, num_relations);
  const double de = config.dim_e, dr = config.dim_r;
  InitUnitRows(p.tensor(TensorId::kEntity), 6.0 / std::sqrt(de), rng);
  InitUnitRows(p.tensor(TensorId::kRelation), 6.0 / std::sqrt(dr), rng);
  switch (kind) {
    case ModelKind::kTransE:
      break;
    case ModelKind::kTransH:
      InitUnitRows(p.tensor(TensorId::kNormal), 6.0 / std::sqrt(de), rng);
      break;
    case ModelKind::kTransR: {
      auto& m = p.tensor(TensorId::kProjection);
      for (std::int64_t r = 0; r < m.rows; ++r) {
        FillRectIdentity(m.Row(r), static_cast<std::size_t>(config.dim_r),
                         static_cast<std::size_t>(config.dim_e));
      }
      break;
    }
    case ModelKind::kTransF: {
      const double bound = 6.0 / std::sqrt(de * dr);
      FillUniform(p.tensor(TensorId::kHeadBasis).data, bound, rng);
      FillUniform(p.tensor(TensorId::kTailBasis).data, bound, rng);
      break;
    }
  }
  return p;
}

ModelParams InitTransFFromTransE(const ModelParams& transe,
                                 const EnergyConfig& config,
                                 std::mt19937_64& rng) {
  if (transe.kind() != ModelKind::kTransE) {
    throw UsageError("transfer source must be a transe model");
  }
  if (config.dim_e != transe.config().dim_e) {
    throw DimensionError("transe dimension " +
                         std::to_string(transe.config().dim_e) +
                         " differs from dim_e " +
                         std::to_string(config.dim_e));
  }
  if (config.dim_r != config.dim_e) {
    throw DimensionError("transfer from transe requires dim_r == dim_e (got " +
                         std::to_string(config.dim_e) + " and " +
                         std::to_string(config.dim_r) + ")");
  }
  ModelParams p(ModelKind::kTransF, config, transe.num_entities(),
                transe.num_relations());
  p.tensor(TensorId::kEntity) = transe.tensor(TensorId::kEntity);
  p.tensor(TensorId::kRelation) = transe.tensor(TensorId::kRelation);
  const double bound =
      6.0 / std::sqrt(static_cast<double>(config.dim_e) * config.dim_r);
  FillUniform(p.tensor(TensorId::kHeadBasis).data, bound, rng);
  FillUniform(p.tensor(TensorId::kTailBasis).data, bound, rng);
  return p;
}

std::int64_t ParamCount(ModelKind kind, std::int64_t num_entities,
                        std::int64_t num_relations, std::int64_t dim_e,
                        std::int64_t dim_r, std::int64_t bases) {
  switch (kind) {
    case ModelKind::kTransE:
      return (num_entities + num_relations) * dim_e;
    case ModelKind::kTransH:
      return num_entities * dim_e + 2 * num_relations * dim_e;
    case ModelKind::kTransR:
      return num_entities * dim_e + num_relations * dim_r +
             num_relations * dim_e * dim_r;
    case ModelKind::kTransF:
      return num_entities * dim_e + num_relations * (dim_r + 2 * bases) +
             2 * bases * dim_e * dim_r;
  }
  return 0;
}

std::uint64_t ProjectionFallbackCount() {
  return g_projection_fallbacks.load(std::memory_order_relaxed);
}

void ResetProjectionFallbackCount() {
  g_projection_fallbacks.store(0, std::memory_order_relaxed);
}

}  // namespace kge
