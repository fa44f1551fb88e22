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

#include "kge/optimizer.h"

#include <cmath>

namespace kge {

OptimizerState::OptimizerState(const ModelParams& params) {
  for (TensorId id : params.ActiveTensors()) {
    const ParamTensor& t = params.tensor(id);
    Slot& s = slot(id);
    s.m.Resize(t.rows, t.cols);
    s.v.Resize(t.rows, t.cols);
    s.steps.assign(static_cast<std::size_t>(t.rows), 0);
  }
}

std::int64_t OptimizerState::step(SliceId id) const {
  return slot(id.tensor).steps.at(static_cast<std::size_t>(id.row));
}

std::span<const double> OptimizerState::first_moment(SliceId id) const {
  return slot(id.tensor).m.Row(id.row);
}

std::span<const double> OptimizerState::second_moment(SliceId id) const {
  return slot(id.tensor).v.Row(id.row);
}

std::vector<double> AdamStep(OptimizerState& state, SliceId id,
                             std::span<const double> gradient,
                             const AdamConfig& config) {
  auto& s = state.slot(id.tensor);
  if (id.row < 0 || id.row >= s.m.rows ||
      gradient.size() != static_cast<std::size_t>(s.m.cols)) {
    throw DimensionError("gradient block for " + SliceName(id) +
                         " does not match the optimizer state");
  }
  auto m = s.m.Row(id.row);
  auto v = s.v.Row(id.row);
  const std::int64_t t = ++s.steps[static_cast<std::size_t>(id.row)];
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  std::vector<double> delta(gradient.size());
  for (std::size_t k = 0; k < gradient.size(); ++k) {
    const double g = gradient[k];
    m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * g;
    v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * g * g;
    const double m_hat = m[k] / bias1;
    const double v_hat = v[k] / bias2;
    delta[k] = -config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
  return delta;
}

void ApplyAdam(ModelParams& params, OptimizerState& state,
               const SparseGradient& gradient, const AdamConfig& config,
               std::vector<SliceId>* touched) {
  for (const auto& [id, block] : gradient.blocks()) {
    const std::vector<double> delta = AdamStep(state, id, block, config);
    auto row = params.slice(id);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += delta[k];
    if (touched != nullptr) touched->push_back(id);
  }
}

}  // namespace kge
