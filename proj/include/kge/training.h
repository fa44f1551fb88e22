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

#ifndef KGE_TRAINING_H_
#define KGE_TRAINING_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kge/dataset.h"
#include "kge/models.h"
#include "kge/optimizer.h"
#include "kge/sampling.h"

namespace kge {

struct TrainConfig {
  double margin = 1.0;
  double learning_rate = 0.001;
  std::int32_t batch_size = 4096;
  std::int32_t epochs = 150;
  // TransE epochs run before a TransF model is initialised from it.
  std::int32_t pretrain_epochs = 0;
  SamplingMode sampling = SamplingMode::kBern;
  bool filter_negatives = true;
  std::int32_t negatives_per_positive = 1;
  std::uint64_t seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool bound_entities = true;
  // > 1 computes batch gradients on worker threads. Results then depend on
  // the thread count.
  std::int32_t threads = 1;
  // Early stopping on a validation score (higher is better). 0 disables.
  std::int32_t validate_every = 0;
  std::int32_t patience = 3;

  void Validate() const;
  AdamConfig adam() const {
    return {learning_rate, beta1, beta2, epsilon};
  }
};

double MarginLoss(double energy_positive, double energy_negative,
                  double margin);

struct EpochLog {
  std::int32_t epoch = 0;  // 1-based, continuous across pretraining
  ModelKind model = ModelKind::kTransE;
  double mean_loss = 0.0;
  double violation_rate = 0.0;
  double seconds = 0.0;
};

// `epoch<TAB>mean_loss<TAB>violation_rate<TAB>wall_clock_seconds\n`
std::string FormatEpochLog(const EpochLog& entry);

struct TrainResult {
  ModelParams params;
  std::vector<EpochLog> log;
  std::uint64_t exhausted_negative_retries = 0;
  std::optional<std::int32_t> stopped_early_at;
};

struct TrainHooks {
  std::function<void(const EpochLog&)> on_epoch;
  // Score of the current params on held-out data; used when
  // TrainConfig::validate_every > 0.
  std::function<double(const ModelParams&)> validation_score;
};

// Runs the margin-loss optimisation of an existing model. Owned by Train;
// exposed so callers can continue from a checkpoint.
class Trainer {
 public:
  Trainer(const Dataset& dataset, const RelationStats& stats,
          const KnownTripleIndex& known, const TrainConfig& config);

  // Trains `params` for `epochs` epochs with a fresh optimizer state and
  // appends to `log`. Epoch numbers continue from `first_epoch`.
  void Run(ModelParams& params, std::int32_t epochs, std::int32_t first_epoch,
           std::vector<EpochLog>& log, const TrainHooks& hooks,
           std::optional<std::int32_t>* stopped_early = nullptr);

  std::uint64_t exhausted_negative_retries() const {
    return sampler_.exhausted_retries();
  }

 private:
  EpochLog RunEpoch(ModelParams& params, OptimizerState& optimizer,
                    std::int32_t epoch);

  const Dataset& dataset_;
  TrainConfig config_;
  NegativeSampler sampler_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
};

// Full pipeline: optional TransE pretraining and transfer for TransF, then
// training of `kind`. Parameter initialisation and the shuffle/negative
// stream use separate generators derived from config.seed.
TrainResult Train(const Dataset& dataset, ModelKind kind,
                  const EnergyConfig& energy, const TrainConfig& config,
                  const TrainHooks& hooks = {});

// Same, starting from `initial` instead of a fresh initialisation.
TrainResult ContinueTraining(const Dataset& dataset, ModelParams initial,
                             const TrainConfig& config,
                             const TrainHooks& hooks = {});

// True if every constraint enforced by EnforceConstraints holds.
bool ConstraintsHold(const ModelParams& params, bool bound_entities = true);

}  // namespace kge

#endif  // KGE_TRAINING_H_
