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

#ifndef KGE_BENCH_H_
#define KGE_BENCH_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kge/dataset.h"
#include "kge/models.h"
#include "kge/training.h"

namespace kge {

struct BenchOptions {
  std::vector<ModelKind> kinds = {ModelKind::kTransE, ModelKind::kTransH,
                                  ModelKind::kTransR, ModelKind::kTransF};
  std::vector<std::int32_t> bases = {5};  // one TransF row per value
  std::int32_t dim_e = 100;
  std::int32_t dim_r = 100;
  // Timed epochs; the median is reported after `warmup_epochs`.
  std::int32_t timed_epochs = 3;
  std::int32_t warmup_epochs = 1;
  // When false only parameter counts are produced.
  bool measure_time = true;
  TrainConfig train;
};

struct BenchRow {
  ModelKind kind = ModelKind::kTransE;
  std::int32_t bases = 0;
  std::int64_t params = 0;  // closed form
  std::int64_t allocated = 0;  // scalars in an initialised model
  std::optional<double> seconds_per_epoch;
};

struct BenchReport {
  std::int32_t num_entities = 0;
  std::int32_t num_relations = 0;
  std::int64_t num_triples = 0;
  std::vector<BenchRow> rows;

  // TransF / TransR for the first TransF row; empty if either is missing.
  std::optional<double> param_ratio() const;
  std::optional<double> time_ratio() const;
};

// Throws InternalError if a closed-form count disagrees with the allocation.
BenchReport RunBench(const Dataset& dataset, const BenchOptions& options);

// Parameter counts only, for vocabulary sizes without a dataset.
BenchReport RunParamBench(std::int32_t num_entities,
                          std::int32_t num_relations,
                          const BenchOptions& options);

std::string FormatBench(const BenchReport& report);

}  // namespace kge

#endif  // KGE_BENCH_H_
