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

#include "kge/bench.h"

#include <algorithm>

#include "kge/io.h"

namespace kge {
namespace {

std::vector<BenchRow> PlanRows(const BenchOptions& options) {
  std::vector<BenchRow> rows;
  for (ModelKind kind : options.kinds) {
    BenchRow row;
    row.kind = kind;
    if (kind == ModelKind::kTransF) {
      for (std::int32_t s : options.bases) {
        row.bases = s;
        rows.push_back(row);
      }
    } else {
      rows.push_back(row);
    }
  }
  return rows;
}

EnergyConfig RowConfig(const BenchRow& row, const BenchOptions& options) {
  EnergyConfig c;
  c.dim_e = options.dim_e;
  const bool separate_space =
      row.kind == ModelKind::kTransR || row.kind == ModelKind::kTransF;
  c.dim_r = separate_space ? options.dim_r : options.dim_e;
  c.bases = row.kind == ModelKind::kTransF ? row.bases : 1;
  return c;
}

void CountParams(BenchRow& row, const EnergyConfig& config,
                 std::int32_t num_entities, std::int32_t num_relations) {
  row.params = ParamCount(row.kind, num_entities, num_relations, config.dim_e,
                          config.dim_r, row.kind == ModelKind::kTransF
                                            ? row.bases
                                            : 0);
  // Allocation only; the values are irrelevant here.
  ModelParams shape_only(row.kind, config, num_entities, num_relations);
  row.allocated = shape_only.NumScalars();
  if (row.allocated != row.params) {
    throw InternalError(std::string("parameter count mismatch for ") +
                        ModelKindName(row.kind) + ": closed form " +
                        std::to_string(row.params) + ", allocated " +
                        std::to_string(row.allocated));
  }
}

const BenchRow* FindRow(const BenchReport& report, ModelKind kind) {
  for (const auto& row : report.rows) {
    if (row.kind == kind) return &row;
  }
  return nullptr;
}

}  // namespace

std::optional<double> BenchReport::param_ratio() const {
  const BenchRow* f = FindRow(*this, ModelKind::kTransF);
  const BenchRow* r = FindRow(*this, ModelKind::kTransR);
  if (f == nullptr || r == nullptr) return std::nullopt;
  return static_cast<double>(f->params) / static_cast<double>(r->params);
}

std::optional<double> BenchReport::time_ratio() const {
  const BenchRow* f = FindRow(*this, ModelKind::kTransF);
  const BenchRow* r = FindRow(*this, ModelKind::kTransR);
  if (f == nullptr || r == nullptr || !f->seconds_per_epoch ||
      !r->seconds_per_epoch) {
    return std::nullopt;
  }
  return *f->seconds_per_epoch / *r->seconds_per_epoch;
}

BenchReport RunParamBench(std::int32_t num_entities,
                          std::int32_t num_relations,
                          const BenchOptions& options) {
  BenchReport report;
  report.num_entities = num_entities;
  report.num_relations = num_relations;
  report.rows = PlanRows(options);
  for (auto& row : report.rows) {
    CountParams(row, RowConfig(row, options), num_entities, num_relations);
  }
  return report;
}

BenchReport RunBench(const Dataset& dataset, const BenchOptions& options) {
  if (options.timed_epochs < 1 || options.warmup_epochs < 0) {
    throw UsageError("bench needs >= 1 timed epoch");
  }
  BenchReport report;
  report.num_entities = dataset.vocabulary.num_entities();
  report.num_relations = dataset.vocabulary.num_relations();
  report.num_triples = static_cast<std::int64_t>(dataset.train.size());
  report.rows = PlanRows(options);

  RelationStats stats;
  KnownTripleIndex known;
  if (options.measure_time) {
    stats = ComputeRelationStats(dataset);
    known = BuildKnownIndex(dataset);
  }
  for (auto& row : report.rows) {
    const EnergyConfig config = RowConfig(row, options);
    CountParams(row, config, report.num_entities, report.num_relations);
    if (!options.measure_time) continue;

    TrainConfig train = options.train;
    train.pretrain_epochs = 0;
    std::mt19937_64 rng(train.seed);
    ModelParams params = InitModel(row.kind, config, report.num_entities,
                                   report.num_relations, rng);
    Trainer trainer(dataset, stats, known, train);
    std::vector<EpochLog> log;
    trainer.Run(params, options.warmup_epochs + options.timed_epochs, 1, log,
                {});
    std::vector<double> seconds;
    for (std::size_t i = static_cast<std::size_t>(options.warmup_epochs);
         i < log.size(); ++i) {
      seconds.push_back(log[i].seconds);
    }
    std::sort(seconds.begin(), seconds.end());
    const std::size_t n = seconds.size();
    row.seconds_per_epoch =
        n % 2 == 1 ? seconds[n / 2] : 0.5 * (seconds[n / 2 - 1] + seconds[n / 2]);
  }
  return report;
}

std::string FormatBench(const BenchReport& report) {
  std::string out = "# entities\t" + std::to_string(report.num_entities) +
                    "\n# relations\t" + std::to_string(report.num_relations) +
                    "\n# triples\t" + std::to_string(report.num_triples) +
                    "\nmodel\tbases\tparams\tseconds_per_epoch\n";
  for (const auto& row : report.rows) {
    out += ModelKindName(row.kind);
    out += '\t' + std::to_string(row.bases) + '\t' +
           std::to_string(row.params) + '\t';
    out += row.seconds_per_epoch ? FormatFloat(*row.seconds_per_epoch) : "-";
    out += '\n';
  }
  if (auto r = report.param_ratio()) {
    out += "# transf/transr params\t" + FormatFloat(*r) + '\n';
  }
  if (auto r = report.time_ratio()) {
    out += "# transf/transr time\t" + FormatFloat(*r) + '\n';
  }
  return out;
}

}  // namespace kge
