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

// kge: train, evaluate and inspect translation-based knowledge graph
// embeddings.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kge/bench.h"
#include "kge/dataset.h"
#include "kge/evaluation.h"
#include "kge/io.h"
#include "kge/models.h"
#include "kge/synthetic.h"
#include "kge/training.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct DataFlags {
  std::string train;
  std::string valid;
  std::string test;
};

struct ModelFlags {
  std::string model = "transf";
  std::string norm = "l1";
  std::int32_t dim_e = 50;
  std::int32_t dim_r = 0;  // 0: same as dim_e
  std::int32_t bases = 5;
  std::string normalize_projections = "on";
};

struct TrainFlags {
  double margin = 1.0;
  double lr = 0.001;
  std::int32_t batch_size = 4096;
  std::int32_t epochs = 150;
  std::int32_t pretrain_epochs = 0;
  std::string sampling = "bern";
  std::string filter_negatives = "on";
  std::int32_t negatives = 1;
  std::uint64_t seed = 1;
  std::int32_t threads = 1;
  std::int32_t validate_every = 0;
  std::int32_t patience = 3;
  std::string bound_entities = "on";
  std::string storage = "f64";
};

const std::vector<std::string> kOnOff = {"on", "off"};

void AddDataFlags(CLI::App* cmd, DataFlags& f, bool required) {
  auto* train = cmd->add_option("--train", f.train, "Train split (TSV)");
  if (required) train->required();
  cmd->add_option("--valid", f.valid, "Validation split (TSV)");
  cmd->add_option("--test", f.test, "Test split (TSV)");
}

void AddModelFlags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--model", f.model, "Model kind")
      ->check(CLI::IsMember({"transe", "transh", "transr", "transf"}));
  cmd->add_option("--norm", f.norm, "Energy norm")
      ->check(CLI::IsMember({"l1", "l2"}));
  cmd->add_option("--dim-e", f.dim_e, "Entity dimension")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--dim-r", f.dim_r,
                  "Relation dimension (default: same as --dim-e)");
  cmd->add_option("--bases", f.bases, "Number of TransF bases")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--normalize-projections", f.normalize_projections,
                  "Rescale projected vectors to unit norm")
      ->check(CLI::IsMember(kOnOff));
}

void AddTrainFlags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--margin", f.margin, "Margin gamma");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--batch-size", f.batch_size, "Positives per batch");
  cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--pretrain-epochs", f.pretrain_epochs,
                  "TransE epochs before TransF training");
  cmd->add_option("--sampling", f.sampling, "Corruption sampling")
      ->check(CLI::IsMember({"unif", "bern"}));
  cmd->add_option("--filter-negatives", f.filter_negatives,
                  "Reject known-true negatives")
      ->check(CLI::IsMember(kOnOff));
  cmd->add_option("--negatives", f.negatives, "Negatives per positive");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--threads", f.threads,
                  "Gradient worker threads (>1 is not bitwise reproducible "
                  "across thread counts)");
  cmd->add_option("--validate-every", f.validate_every,
                  "Early stopping on validation filtered MRR every N epochs "
                  "(0 = off)");
  cmd->add_option("--patience", f.patience, "Early-stopping patience");
  cmd->add_option("--bound-entities", f.bound_entities,
                  "Keep entity rows inside the unit ball")
      ->check(CLI::IsMember(kOnOff));
}

kge::Dataset LoadData(const DataFlags& f) {
  kge::Dataset d = kge::LoadDataset(f.train, f.valid, f.test);
  d.Validate();
  return d;
}

kge::EnergyConfig ToEnergyConfig(const ModelFlags& f) {
  kge::EnergyConfig c;
  c.norm = kge::ParseNorm(f.norm);
  c.dim_e = f.dim_e;
  c.dim_r = f.dim_r > 0 ? f.dim_r : f.dim_e;
  c.bases = f.bases;
  c.normalize_projections = f.normalize_projections == "on";
  return c;
}

kge::TrainConfig ToTrainConfig(const TrainFlags& f) {
  kge::TrainConfig c;
  c.margin = f.margin;
  c.learning_rate = f.lr;
  c.batch_size = f.batch_size;
  c.epochs = f.epochs;
  c.pretrain_epochs = f.pretrain_epochs;
  c.sampling = kge::ParseSamplingMode(f.sampling);
  c.filter_negatives = f.filter_negatives == "on";
  c.negatives_per_positive = f.negatives;
  c.seed = f.seed;
  c.threads = f.threads;
  c.validate_every = f.validate_every;
  c.patience = f.patience;
  c.bound_entities = f.bound_entities == "on";
  c.Validate();
  return c;
}

void PrintWarnings(const kge::RelationStats& stats) {
  for (const auto& w : stats.warnings) std::cerr << "warning: " << w << '\n';
}

// Loads a checkpoint; with `as_transf_init` a TransE checkpoint is turned
// into a TransF model through the zero-coefficient transfer.
kge::Checkpoint LoadModel(const std::string& path,
                          const kge::Vocabulary& vocabulary,
                          bool allow_vocab_mismatch, const std::string& as,
                          const ModelFlags& model, std::uint64_t seed) {
  kge::Checkpoint ckpt = kge::LoadCheckpoint(path);
  kge::CheckVocabulary(ckpt.metadata, vocabulary, allow_vocab_mismatch);
  if (as == "transf-init") {
    kge::EnergyConfig config = ckpt.params.config();
    config.bases = model.bases;
    config.dim_r = config.dim_e;
    std::mt19937_64 rng(seed);
    ckpt.params = kge::InitTransFFromTransE(ckpt.params, config, rng);
    ckpt.metadata = kge::MakeMetadata(ckpt.params, vocabulary);
  }
  return ckpt;
}

int Prepare(const DataFlags& data, double threshold,
            const std::string& stats_out) {
  const kge::Dataset d = LoadData(data);
  const kge::RelationStats stats = kge::ComputeRelationStats(d, threshold);
  PrintWarnings(stats);
  const kge::KnownTripleIndex known = kge::BuildKnownIndex(d);
  std::array<int, 4> per_category{};
  for (const auto& s : stats.per_relation) {
    ++per_category[static_cast<std::size_t>(s.category)];
  }
  std::cout << "train\t" << d.train.size() << "\nvalid\t" << d.valid.size()
            << "\ntest\t" << d.test.size() << "\nentities\t"
            << d.vocabulary.num_entities() << "\nrelations\t"
            << d.vocabulary.num_relations() << "\nknown_triples\t"
            << known.size() << '\n';
  for (std::size_t c = 0; c < 4; ++c) {
    std::cout << "relations_"
              << kge::CategoryName(static_cast<kge::RelationCategory>(c))
              << '\t' << per_category[c] << '\n';
  }
  if (!stats_out.empty()) {
    std::string text = "relation\ttriples\thpt\ttph\tcategory\n";
    for (kge::RelationId r = 0; r < d.vocabulary.num_relations(); ++r) {
      const auto& s = stats[r];
      text += d.vocabulary.RelationName(r) + '\t' + std::to_string(s.triples) +
              '\t' + kge::FormatFloat(s.hpt) + '\t' + kge::FormatFloat(s.tph) +
              '\t' + kge::CategoryName(s.category) + '\n';
    }
    kge::WriteTextFile(stats_out, text);
  }
  return 0;
}

int Train(const DataFlags& data, const ModelFlags& model,
          const TrainFlags& train_flags, const std::string& checkpoint_out,
          const std::string& log_path, const std::string& init_checkpoint,
          const std::string& as, bool allow_vocab_mismatch) {
  const kge::Dataset d = LoadData(data);
  const kge::RelationStats stats = kge::ComputeRelationStats(d);
  PrintWarnings(stats);
  const kge::TrainConfig config = ToTrainConfig(train_flags);

  std::unique_ptr<std::ofstream> log_file;
  if (!log_path.empty()) {
    log_file = std::make_unique<std::ofstream>(log_path, std::ios::trunc);
    if (!*log_file) throw kge::DataError("cannot write " + log_path);
  }
  kge::TrainHooks hooks;
  hooks.on_epoch = [&](const kge::EpochLog& e) {
    const std::string line = kge::FormatEpochLog(e);
    if (log_file) {
      *log_file << line;
      log_file->flush();
    }
    std::cerr << kge::ModelKindName(e.model) << '\t' << line;
  };
  kge::KnownTripleIndex known;
  if (config.validate_every > 0) {
    if (d.valid.empty()) {
      throw kge::UsageError("--validate-every needs a --valid split");
    }
    known = kge::BuildKnownIndex(d);
    hooks.validation_score = [&](const kge::ModelParams& p) {
      kge::EvalOptions options;
      options.threads = config.threads;
      return kge::EvaluateLinkPrediction(p, d.valid, known, stats, options)
          .filtered.overall.mrr;
    };
  }

  kge::TrainResult result;
  if (!init_checkpoint.empty()) {
    kge::Checkpoint start = LoadModel(init_checkpoint, d.vocabulary,
                                      allow_vocab_mismatch, as, model,
                                      config.seed);
    result = kge::ContinueTraining(d, std::move(start.params), config, hooks);
  } else {
    result = kge::Train(d, kge::ParseModelKind(model.model),
                        ToEnergyConfig(model), config, hooks);
  }
  if (result.exhausted_negative_retries > 0) {
    std::cerr << "warning: " << result.exhausted_negative_retries
              << " negatives were known-true after 100 attempts\n";
  }
  if (result.stopped_early_at) {
    std::cerr << "early stop at epoch " << *result.stopped_early_at << '\n';
  }
  if (const auto fallbacks = kge::ProjectionFallbackCount()) {
    std::cerr << "warning: " << fallbacks
              << " zero-length projections were not normalised\n";
  }
  kge::CheckpointMetadata meta = kge::MakeMetadata(result.params, d.vocabulary);
  meta.train_config = config;
  meta.epoch = result.log.empty() ? 0 : result.log.back().epoch;
  kge::SaveCheckpoint(result.params, meta, checkpoint_out,
                      train_flags.storage == "f32"
                          ? kge::StorageType::kFloat32
                          : kge::StorageType::kFloat64);
  return 0;
}

int Eval(const DataFlags& data, const std::string& checkpoint,
         const std::string& split, const std::string& tie_policy,
         const std::string& report_path, const std::string& json_path,
         const std::string& as, const ModelFlags& model, std::uint64_t seed,
         std::int32_t threads, bool allow_vocab_mismatch) {
  const kge::Dataset d = LoadData(data);
  const kge::RelationStats stats = kge::ComputeRelationStats(d);
  PrintWarnings(stats);
  const kge::Checkpoint ckpt =
      LoadModel(checkpoint, d.vocabulary, allow_vocab_mismatch, as, model, seed);
  const kge::KnownTripleIndex known = kge::BuildKnownIndex(d);
  kge::EvalOptions options;
  options.tie_policy = kge::ParseTiePolicy(tie_policy);
  options.threads = threads;
  const auto& triples = split == "valid" ? d.valid : d.test;
  const kge::EvalReport report =
      kge::EvaluateLinkPrediction(ckpt.params, triples, known, stats, options);
  const std::string text = kge::FormatReport(report);
  std::cout << text;
  if (!report_path.empty()) kge::WriteTextFile(report_path, text);
  if (!json_path.empty()) {
    kge::WriteTextFile(json_path, kge::ReportToJson(report).dump(2) + "\n");
  }
  return 0;
}

int ExportRelations(const DataFlags& data, const std::string& checkpoint,
                    const std::string& out, bool translation_only,
                    bool allow_vocab_mismatch) {
  const kge::Dataset d = LoadData(data);
  const kge::Checkpoint ckpt = kge::LoadCheckpoint(checkpoint);
  kge::CheckVocabulary(ckpt.metadata, d.vocabulary, allow_vocab_mismatch);
  kge::ExportRelations(ckpt.params, d.vocabulary, out, translation_only);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translation-based knowledge graph embeddings (TransE, TransH, "
               "TransR, TransF)"};
  app.require_subcommand(1);

  DataFlags data;
  ModelFlags model;
  TrainFlags train;
  bool allow_vocab_mismatch = false;
  std::string as;

  auto* prepare = app.add_subcommand("prepare", "Validate a dataset and print "
                                                "its statistics");
  AddDataFlags(prepare, data, true);
  double threshold = 1.5;
  std::string stats_out;
  prepare->add_option("--threshold", threshold,
                      "hpt/tph cut between 1 and N");
  prepare->add_option("--stats-out", stats_out,
                      "Write per-relation statistics (TSV)");

  auto* train_cmd = app.add_subcommand("train", "Train a model");
  AddDataFlags(train_cmd, data, true);
  AddModelFlags(train_cmd, model);
  AddTrainFlags(train_cmd, train);
  std::string checkpoint_out, log_path, init_checkpoint;
  train_cmd->add_option("--checkpoint", checkpoint_out, "Output checkpoint")
      ->required();
  train_cmd->add_option("--log", log_path, "Per-epoch training log (TSV)");
  train_cmd->add_option("--init-checkpoint", init_checkpoint,
                        "Continue from this checkpoint");
  train_cmd->add_option("--as", as, "Reinterpret --init-checkpoint")
      ->check(CLI::IsMember({"transf-init"}));
  train_cmd->add_flag("--allow-vocab-mismatch", allow_vocab_mismatch,
                      "Skip the vocabulary hash check");
  train_cmd->add_option("--storage", train.storage,
                        "Checkpoint element width (f64 is lossless)")
      ->check(CLI::IsMember({"f32", "f64"}));

  auto* eval = app.add_subcommand("eval", "Link-prediction evaluation");
  AddDataFlags(eval, data, true);
  std::string checkpoint_in, split = "test", tie_policy = "mean", report_path,
                             json_path;
  std::int32_t eval_threads = 1;
  std::uint64_t eval_seed = 1;
  eval->add_option("--checkpoint", checkpoint_in, "Model checkpoint")
      ->required();
  eval->add_option("--split", split, "Split to rank")
      ->check(CLI::IsMember({"test", "valid"}));
  eval->add_option("--tie-policy", tie_policy, "Tie handling")
      ->check(CLI::IsMember({"mean", "optimistic", "pessimistic"}));
  eval->add_option("--report", report_path, "Write key/value report");
  eval->add_option("--report-json", json_path, "Write JSON report");
  eval->add_option("--as", as, "Reinterpret the checkpoint")
      ->check(CLI::IsMember({"transf-init"}));
  eval->add_option("--bases", model.bases, "Bases for --as transf-init");
  eval->add_option("--seed", eval_seed, "Seed for --as transf-init");
  eval->add_option("--threads", eval_threads, "Ranking worker threads");
  eval->add_flag("--allow-vocab-mismatch", allow_vocab_mismatch,
                 "Skip the vocabulary hash check");

  auto* export_cmd = app.add_subcommand(
      "export-relations", "Write [r; alpha; beta] per relation as TSV");
  AddDataFlags(export_cmd, data, true);
  std::string export_out;
  bool translation_only = false;
  export_cmd->add_option("--checkpoint", checkpoint_in, "Model checkpoint")
      ->required();
  export_cmd->add_option("--out", export_out, "Output TSV")->required();
  export_cmd->add_flag("--translation-only", translation_only,
                       "Export r without the coefficient vectors");
  export_cmd->add_flag("--allow-vocab-mismatch", allow_vocab_mismatch,
                       "Skip the vocabulary hash check");

  auto* bench = app.add_subcommand(
      "bench", "Parameter counts and seconds per epoch per model");
  AddDataFlags(bench, data, false);
  std::vector<std::string> bench_models = {"transe", "transh", "transr",
                                           "transf"};
  std::vector<std::int32_t> bench_bases = {5};
  std::int32_t bench_entities = 14951, bench_relations = 1345;
  std::int64_t bench_triples = 0;
  std::int32_t bench_dim = 100, bench_epochs = 3;
  bool params_only = false;
  TrainFlags bench_train;
  bench->add_option("--models", bench_models, "Models to benchmark")
      ->check(CLI::IsMember({"transe", "transh", "transr", "transf"}));
  bench->add_option("--bases", bench_bases, "TransF basis counts");
  bench->add_option("--entities", bench_entities,
                    "Synthetic entity count (without --train)");
  bench->add_option("--relations", bench_relations,
                    "Synthetic relation count (without --train)");
  bench->add_option("--triples", bench_triples,
                    "Synthetic train triples (without --train; 0 = params "
                    "only)");
  bench->add_option("--dim", bench_dim, "Entity and relation dimension");
  bench->add_option("--epochs", bench_epochs, "Timed epochs after 1 warm-up");
  bench->add_option("--batch-size", bench_train.batch_size, "Batch size");
  bench->add_option("--seed", bench_train.seed, "Random seed");
  bench->add_flag("--params-only", params_only, "Skip timing");

  auto* params = app.add_subcommand("params", "Closed-form parameter count");
  std::int64_t p_entities = 14951, p_relations = 1345;
  params->add_option("--entities", p_entities, "Entity count");
  params->add_option("--relations", p_relations, "Relation count");
  AddModelFlags(params, model);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*prepare) return Prepare(data, threshold, stats_out);
    if (*train_cmd) {
      return Train(data, model, train, checkpoint_out, log_path,
                   init_checkpoint, as, allow_vocab_mismatch);
    }
    if (*eval) {
      return Eval(data, checkpoint_in, split, tie_policy, report_path,
                  json_path, as, model, eval_seed, eval_threads,
                  allow_vocab_mismatch);
    }
    if (*export_cmd) {
      return ExportRelations(data, checkpoint_in, export_out, translation_only,
                             allow_vocab_mismatch);
    }
    if (*bench) {
      kge::BenchOptions options;
      options.kinds.clear();
      for (const auto& m : bench_models) {
        options.kinds.push_back(kge::ParseModelKind(m));
      }
      options.bases = bench_bases;
      options.dim_e = options.dim_r = bench_dim;
      options.timed_epochs = bench_epochs;
      options.train = ToTrainConfig(bench_train);
      kge::BenchReport report;
      if (!data.train.empty()) {
        options.measure_time = !params_only;
        report = kge::RunBench(LoadData(data), options);
      } else if (bench_triples > 0 && !params_only) {
        report = kge::RunBench(
            kge::RandomDataset(bench_entities, bench_relations, bench_triples,
                               bench_train.seed),
            options);
      } else {
        report = kge::RunParamBench(bench_entities, bench_relations, options);
      }
      std::cout << kge::FormatBench(report);
      return 0;
    }
    if (*params) {
      const kge::EnergyConfig c = ToEnergyConfig(model);
      const kge::ModelKind kind = kge::ParseModelKind(model.model);
      c.Validate(kind);
      std::cout << kge::ParamCount(kind, p_entities, p_relations, c.dim_e,
                                   c.dim_r,
                                   kind == kge::ModelKind::kTransF ? c.bases
                                                                   : 0)
                << '\n';
      return 0;
    }
  } catch (const kge::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const kge::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const kge::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
