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

#include "kge/training.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

namespace kge {
namespace {

// Offsets the seed of the parameter-initialisation generator so it is
// independent of the shuffle/sampling stream.
constexpr std::uint64_t kInitStream = 0x5DEECE66DULL;

struct Pair {
  Triple positive;
  Triple negative;
};

struct ChunkResult {
  std::vector<double> losses;
  SparseGradient gradient;
  std::size_t failed = static_cast<std::size_t>(-1);
  std::string error;
};

void ProcessChunk(const ModelParams& params, std::span<const Pair> pairs,
                  double margin, ChunkResult& out) {
  out.losses.resize(pairs.size());
  std::vector<WeightedTriple> items;
  items.reserve(2 * pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    double loss = 0.0;
    try {
      loss = MarginLoss(Energy(params, pairs[i].positive),
                        Energy(params, pairs[i].negative), margin);
    } catch (const NumericError& e) {
      out.failed = i;
      out.error = e.what();
      return;
    }
    out.losses[i] = loss;
    if (!std::isfinite(loss)) {
      out.failed = i;
      out.error = "non-finite loss";
      return;
    }
    if (loss > 0.0) {
      items.push_back({pairs[i].positive, 1.0});
      items.push_back({pairs[i].negative, -1.0});
    }
  }
  AccumulateGradient(params, items, out.gradient);
}

std::string TripleText(const Triple& t) {
  return "(" + std::to_string(t.head) + ", " + std::to_string(t.relation) +
         ", " + std::to_string(t.tail) + ")";
}

void AppendDouble(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

}  // namespace

void TrainConfig::Validate() const {
  if (!(margin > 0.0)) throw UsageError("margin must be > 0");
  if (!(learning_rate > 0.0)) throw UsageError("learning rate must be > 0");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (pretrain_epochs < 0) throw UsageError("pretrain epochs must be >= 0");
  if (negatives_per_positive < 1) {
    throw UsageError("negatives per positive must be >= 1");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw UsageError("adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw UsageError("adam epsilon must be > 0");
  if (threads < 1) throw UsageError("threads must be >= 1");
  if (validate_every < 0 || patience < 1) {
    throw UsageError("invalid early-stopping settings");
  }
}

double MarginLoss(double energy_positive, double energy_negative,
                  double margin) {
  return std::max(0.0, energy_positive + margin - energy_negative);
}

std::string FormatEpochLog(const EpochLog& entry) {
  std::string line = std::to_string(entry.epoch);
  line += '\t';
  AppendDouble(line, entry.mean_loss);
  line += '\t';
  AppendDouble(line, entry.violation_rate);
  line += '\t';
  AppendDouble(line, entry.seconds);
  line += '\n';
  return line;
}

Trainer::Trainer(const Dataset& dataset, const RelationStats& stats,
                 const KnownTripleIndex& known, const TrainConfig& config)
    : dataset_(dataset),
      config_(config),
      sampler_(CorruptionPolicy{config.sampling, &stats,
                                config.filter_negatives, 100},
               dataset.vocabulary.num_entities(),
               dataset.vocabulary.num_relations(), &known),
      rng_(config.seed),
      order_(dataset.train.size()) {
  config.Validate();
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

EpochLog Trainer::RunEpoch(ModelParams& params, OptimizerState& optimizer,
                           std::int32_t epoch) {
  const auto start = std::chrono::steady_clock::now();
  std::shuffle(order_.begin(), order_.end(), rng_);
  const std::size_t batch = static_cast<std::size_t>(config_.batch_size);
  const auto workers = static_cast<std::size_t>(config_.threads);
  const AdamConfig adam = config_.adam();

  double loss_sum = 0.0;
  std::size_t violations = 0;
  std::size_t total_pairs = 0;
  std::vector<Pair> pairs;
  std::vector<SliceId> touched;
  std::vector<ChunkResult> chunks(workers);
  std::int32_t batch_index = 0;

  for (std::size_t begin = 0; begin < order_.size(); begin += batch) {
    const std::size_t end = std::min(order_.size(), begin + batch);
    ++batch_index;
    pairs.clear();
    // Negatives are drawn on the calling thread so the rng stream does not
    // depend on the worker count.
    for (std::size_t i = begin; i < end; ++i) {
      const Triple& pos = dataset_.train[order_[i]];
      for (std::int32_t k = 0; k < config_.negatives_per_positive; ++k) {
        pairs.push_back({pos, sampler_.Sample(pos, rng_)});
      }
    }

    const std::size_t used = std::min(workers, pairs.size());
    const std::size_t per = (pairs.size() + used - 1) / used;
    auto chunk_span = [&](std::size_t w) {
      const std::size_t lo = std::min(pairs.size(), w * per);
      const std::size_t hi = std::min(pairs.size(), lo + per);
      return std::span<const Pair>(pairs.data() + lo, hi - lo);
    };
    for (auto& c : chunks) c = ChunkResult{};
    if (used <= 1) {
      ProcessChunk(params, chunk_span(0), config_.margin, chunks[0]);
    } else {
      std::vector<std::jthread> threads;
      for (std::size_t w = 0; w < used; ++w) {
        threads.emplace_back([&, w] {
          ProcessChunk(params, chunk_span(w), config_.margin, chunks[w]);
        });
      }
    }

    SparseGradient gradient;
    for (std::size_t w = 0; w < used; ++w) {
      ChunkResult& c = chunks[w];
      if (c.failed != static_cast<std::size_t>(-1)) {
        const Pair& bad = pairs[w * per + c.failed];
        throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index) + ", positive " +
                           TripleText(bad.positive) + ", negative " +
                           TripleText(bad.negative) + ": " + c.error);
      }
      for (double l : c.losses) {
        loss_sum += l;
        if (l > 0.0) ++violations;
      }
      if (w == 0) {
        gradient = std::move(c.gradient);
      } else {
        gradient.Merge(c.gradient);
      }
    }
    total_pairs += pairs.size();

    if (!gradient.empty()) {
      touched.clear();
      ApplyAdam(params, optimizer, gradient, adam, &touched);
      EnforceConstraints(params, touched, config_.bound_entities);
    }
  }
  EnforceConstraints(params, config_.bound_entities);
#ifndef NDEBUG
  if (!ConstraintsHold(params, config_.bound_entities)) {
    throw InternalError("constraints violated after epoch " +
                        std::to_string(epoch));
  }
#endif

  EpochLog entry;
  entry.epoch = epoch;
  entry.model = params.kind();
  entry.mean_loss = loss_sum / static_cast<double>(total_pairs);
  entry.violation_rate =
      static_cast<double>(violations) / static_cast<double>(total_pairs);
  entry.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  if (!std::isfinite(entry.mean_loss)) {
    throw NumericError("non-finite mean loss in epoch " +
                       std::to_string(epoch));
  }
  return entry;
}

void Trainer::Run(ModelParams& params, std::int32_t epochs,
                  std::int32_t first_epoch, std::vector<EpochLog>& log,
                  const TrainHooks& hooks,
                  std::optional<std::int32_t>* stopped_early) {
  OptimizerState optimizer(params);
  const bool early_stopping =
      config_.validate_every > 0 && hooks.validation_score != nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  std::optional<ModelParams> best;
  std::int32_t bad_checks = 0;

  for (std::int32_t e = 0; e < epochs; ++e) {
    const std::int32_t epoch = first_epoch + e;
    EpochLog entry = RunEpoch(params, optimizer, epoch);
    log.push_back(entry);
    if (hooks.on_epoch) hooks.on_epoch(entry);

    if (early_stopping && (e + 1) % config_.validate_every == 0) {
      const double score = hooks.validation_score(params);
      if (score > best_score) {
        best_score = score;
        best = params;
        bad_checks = 0;
      } else if (++bad_checks >= config_.patience) {
        params = std::move(*best);
        if (stopped_early != nullptr) *stopped_early = epoch;
        return;
      }
    }
  }
}

namespace {

// Negatives are filtered against train facts only; held-out splits never
// influence training.
KnownTripleIndex TrainIndex(const Dataset& dataset) {
  KnownTripleIndex index;
  for (const Triple& t : dataset.train) index.Insert(t);
  return index;
}

}  // namespace

TrainResult Train(const Dataset& dataset, ModelKind kind,
                  const EnergyConfig& energy, const TrainConfig& config,
                  const TrainHooks& hooks) {
  config.Validate();
  energy.Validate(kind);
  const RelationStats stats = ComputeRelationStats(dataset);
  const KnownTripleIndex known = TrainIndex(dataset);
  Trainer trainer(dataset, stats, known, config);
  std::mt19937_64 init_rng(config.seed ^ kInitStream);
  const std::int32_t ne = dataset.vocabulary.num_entities();
  const std::int32_t nr = dataset.vocabulary.num_relations();

  TrainResult result;
  std::int32_t next_epoch = 1;
  if (kind == ModelKind::kTransF && config.pretrain_epochs > 0) {
    EnergyConfig base = energy;
    base.dim_r = base.dim_e;
    ModelParams transe = InitModel(ModelKind::kTransE, base, ne, nr, init_rng);
    TrainHooks pretrain_hooks;
    pretrain_hooks.on_epoch = hooks.on_epoch;
    trainer.Run(transe, config.pretrain_epochs, next_epoch, result.log,
                pretrain_hooks);
    next_epoch += config.pretrain_epochs;
    result.params = InitTransFFromTransE(transe, energy, init_rng);
  } else {
    result.params = InitModel(kind, energy, ne, nr, init_rng);
  }
  trainer.Run(result.params, config.epochs, next_epoch, result.log, hooks,
              &result.stopped_early_at);
  result.exhausted_negative_retries = trainer.exhausted_negative_retries();
  return result;
}

TrainResult ContinueTraining(const Dataset& dataset, ModelParams initial,
                             const TrainConfig& config,
                             const TrainHooks& hooks) {
  config.Validate();
  if (initial.num_entities() != dataset.vocabulary.num_entities() ||
      initial.num_relations() != dataset.vocabulary.num_relations()) {
    throw DimensionError("model and dataset vocabularies differ in size");
  }
  const RelationStats stats = ComputeRelationStats(dataset);
  const KnownTripleIndex known = TrainIndex(dataset);
  Trainer trainer(dataset, stats, known, config);
  TrainResult result;
  result.params = std::move(initial);
  trainer.Run(result.params, config.epochs, 1, result.log, hooks,
              &result.stopped_early_at);
  result.exhausted_negative_retries = trainer.exhausted_negative_retries();
  return result;
}

bool ConstraintsHold(const ModelParams& params, bool bound_entities) {
  auto row_norm = [](std::span<const double> row) {
    double s = 0.0;
    for (double v : row) s += v * v;
    return std::sqrt(s);
  };
  const auto& ent = params.tensor(TensorId::kEntity);
  if (bound_entities) {
    for (std::int64_t i = 0; i < ent.rows; ++i) {
      if (row_norm(ent.Row(i)) > 1.0) return false;
    }
  }
  const auto& rel = params.tensor(TensorId::kRelation);
  for (std::int64_t i = 0; i < rel.rows; ++i) {
    if (row_norm(rel.Row(i)) > 1.0) return false;
  }
  if (params.kind() == ModelKind::kTransH) {
    const auto& w = params.tensor(TensorId::kNormal);
    for (std::int64_t i = 0; i < w.rows; ++i) {
      if (std::abs(row_norm(w.Row(i)) - 1.0) > 1e-6) return false;
    }
  }
  return true;
}

}  // namespace kge
