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

#ifndef KGE_OPTIMIZER_H_
#define KGE_OPTIMIZER_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "kge/models.h"

namespace kge {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Lazy Adam: moments and the bias-correction step count of a row advance
// only when that row receives a gradient.
class OptimizerState {
 public:
  OptimizerState() = default;
  explicit OptimizerState(const ModelParams& params);

  std::int64_t step(SliceId id) const;
  std::span<const double> first_moment(SliceId id) const;
  std::span<const double> second_moment(SliceId id) const;

 private:
  friend std::vector<double> AdamStep(OptimizerState&, SliceId,
                                      std::span<const double>,
                                      const AdamConfig&);

  struct Slot {
    ParamTensor m;
    ParamTensor v;
    std::vector<std::int64_t> steps;
  };
  Slot& slot(TensorId id) { return slots_[static_cast<std::size_t>(id)]; }
  const Slot& slot(TensorId id) const {
    return slots_[static_cast<std::size_t>(id)];
  }

  std::array<Slot, kNumTensors> slots_;
};

// Advances the slice's moments by one step and returns the additive update.
// Throws DimensionError if the block size does not match the slice.
std::vector<double> AdamStep(OptimizerState& state, SliceId id,
                             std::span<const double> gradient,
                             const AdamConfig& config);

// Applies AdamStep to every block of `gradient`; appends the rows it changed
// to `touched` when given.
void ApplyAdam(ModelParams& params, OptimizerState& state,
               const SparseGradient& gradient, const AdamConfig& config,
               std::vector<SliceId>* touched = nullptr);

}  // namespace kge

#endif  // KGE_OPTIMIZER_H_
