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

// Python bindings. Enums cross the boundary as the same lowercase names the
// command line uses ("transf", "l2", "bern", "pessimistic").

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "kge/dataset.h"
#include "kge/evaluation.h"
#include "kge/io.h"
#include "kge/models.h"
#include "kge/synthetic.h"
#include "kge/training.h"

namespace py = pybind11;

namespace kge {
namespace {

using PyTriple = std::tuple<EntityId, RelationId, EntityId>;

std::vector<PyTriple> ToPy(const std::vector<Triple>& triples) {
  std::vector<PyTriple> out;
  out.reserve(triples.size());
  for (const Triple& t : triples) out.emplace_back(t.head, t.relation, t.tail);
  return out;
}

TensorId ParseTensorName(const std::string& name) {
  for (std::size_t i = 0; i < kNumTensors; ++i) {
    const auto id = static_cast<TensorId>(i);
    if (name == TensorName(id)) return id;
  }
  throw UsageError("unknown tensor \"" + name + "\"");
}

py::dict ReportDict(const EvalReport& report) {
  py::dict out;
  for (const auto& [key, value] : FlattenReport(report)) out[key.c_str()] = value;
  return out;
}

py::list LogList(const std::vector<EpochLog>& log) {
  py::list out;
  for (const EpochLog& e : log) {
    py::dict d;
    d["epoch"] = e.epoch;
    d["model"] = ModelKindName(e.model);
    d["mean_loss"] = e.mean_loss;
    d["violation_rate"] = e.violation_rate;
    d["seconds"] = e.seconds;
    out.append(d);
  }
  return out;
}

}  // namespace
}  // namespace kge

PYBIND11_MODULE(_core, m) {
  using namespace kge;
  m.doc() = "Translation-based knowledge graph embeddings";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  auto data = py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<CheckpointError>(m, "CheckpointError", data.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<EnergyConfig>(m, "EnergyConfig")
      .def(py::init<>())
      .def_property(
          "norm", [](const EnergyConfig& c) { return NormName(c.norm); },
          [](EnergyConfig& c, const std::string& s) { c.norm = ParseNorm(s); })
      .def_readwrite("dim_e", &EnergyConfig::dim_e)
      .def_readwrite("dim_r", &EnergyConfig::dim_r)
      .def_readwrite("bases", &EnergyConfig::bases)
      .def_readwrite("normalize_projections",
                     &EnergyConfig::normalize_projections);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("margin", &TrainConfig::margin)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("pretrain_epochs", &TrainConfig::pretrain_epochs)
      .def_property(
          "sampling",
          [](const TrainConfig& c) { return SamplingModeName(c.sampling); },
          [](TrainConfig& c, const std::string& s) {
            c.sampling = ParseSamplingMode(s);
          })
      .def_readwrite("filter_negatives", &TrainConfig::filter_negatives)
      .def_readwrite("negatives_per_positive",
                     &TrainConfig::negatives_per_positive)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("bound_entities", &TrainConfig::bound_entities)
      .def_readwrite("threads", &TrainConfig::threads);

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly(
          "num_entities",
          [](const Dataset& d) { return d.vocabulary.num_entities(); })
      .def_property_readonly(
          "num_relations",
          [](const Dataset& d) { return d.vocabulary.num_relations(); })
      .def_property_readonly(
          "entity_names",
          [](const Dataset& d) { return d.vocabulary.entity_names(); })
      .def_property_readonly(
          "relation_names",
          [](const Dataset& d) { return d.vocabulary.relation_names(); })
      .def_property_readonly("train",
                             [](const Dataset& d) { return ToPy(d.train); })
      .def_property_readonly("valid",
                             [](const Dataset& d) { return ToPy(d.valid); })
      .def_property_readonly("test",
                             [](const Dataset& d) { return ToPy(d.test); })
      .def("relation_categories", [](const Dataset& d) {
        const RelationStats stats = ComputeRelationStats(d);
        py::dict out;
        for (std::size_t r = 0; r < stats.per_relation.size(); ++r) {
          out[d.vocabulary.RelationName(static_cast<RelationId>(r)).c_str()] =
              CategoryName(stats.per_relation[r].category);
        }
        return out;
      });

  m.def("load_dataset", &LoadDataset, py::arg("train"), py::arg("valid") = "",
        py::arg("test") = "", "Reads head<TAB>relation<TAB>tail files.");
  m.def(
      "world_dataset",
      [](std::uint64_t seed) {
        WorldOptions o;
        o.seed = seed;
        return WorldDataset(o);
      },
      py::arg("seed") = WorldOptions{}.seed,
      "Synthetic 200-entity, 12-relation graph with all four categories.");
  m.def("random_dataset", &RandomDataset, py::arg("num_entities"),
        py::arg("num_relations"), py::arg("num_triples"), py::arg("seed"));

  py::class_<ModelParams>(m, "Model")
      .def_property_readonly("kind",
                             [](const ModelParams& p) {
                               return ModelKindName(p.kind());
                             })
      .def_property_readonly("config", &ModelParams::config)
      .def_property_readonly("num_entities", &ModelParams::num_entities)
      .def_property_readonly("num_relations", &ModelParams::num_relations)
      .def_property_readonly("num_params", &ModelParams::NumScalars)
      .def_property_readonly(
          "tensor_names",
          [](const ModelParams& p) {
            std::vector<std::string> names;
            for (TensorId id : p.ActiveTensors()) names.push_back(TensorName(id));
            return names;
          })
      .def(
          "tensor",
          [](const ModelParams& p, const std::string& name) {
            const TensorId id = ParseTensorName(name);
            const auto& data = p.tensor(id).data;
            py::array_t<double> out(p.Shape(id));
            std::copy(data.begin(), data.end(), out.mutable_data());
            return out;
          },
          py::arg("name"), "Copy of a parameter tensor in its logical shape.")
      .def(
          "energy",
          [](const ModelParams& p, EntityId h, RelationId r, EntityId t) {
            return Energy(p, {h, r, t});
          },
          py::arg("head"), py::arg("relation"), py::arg("tail"));

  m.def(
      "init_model",
      [](const std::string& kind, const EnergyConfig& config,
         std::int32_t num_entities, std::int32_t num_relations,
         std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return InitModel(ParseModelKind(kind), config, num_entities,
                         num_relations, rng);
      },
      py::arg("kind"), py::arg("config"), py::arg("num_entities"),
      py::arg("num_relations"), py::arg("seed") = 1);
  m.def(
      "transf_from_transe",
      [](const ModelParams& transe, const EnergyConfig& config,
         std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return InitTransFFromTransE(transe, config, rng);
      },
      py::arg("transe"), py::arg("config"), py::arg("seed") = 1);

  m.def(
      "train",
      [](const Dataset& dataset, const std::string& kind,
         const EnergyConfig& energy, const TrainConfig& config) {
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = Train(dataset, ParseModelKind(kind), energy, config);
        }
        return py::make_tuple(std::move(r.params), LogList(r.log));
      },
      py::arg("dataset"), py::arg("kind"), py::arg("energy"),
      py::arg("config"), "Returns (model, per-epoch log).");

  m.def(
      "evaluate",
      [](const ModelParams& model, const Dataset& dataset,
         const std::string& split, const std::string& tie_policy,
         std::int32_t threads) {
        if (split != "test" && split != "valid") {
          throw UsageError("split must be \"test\" or \"valid\"");
        }
        EvalOptions options;
        options.tie_policy = ParseTiePolicy(tie_policy);
        options.threads = threads;
        EvalReport report;
        {
          py::gil_scoped_release release;
          const KnownTripleIndex known = BuildKnownIndex(dataset);
          const RelationStats stats = ComputeRelationStats(dataset);
          report = EvaluateLinkPrediction(
              model, split == "test" ? dataset.test : dataset.valid, known,
              stats, options);
        }
        return ReportDict(report);
      },
      py::arg("model"), py::arg("dataset"), py::arg("split") = "test",
      py::arg("tie_policy") = "mean", py::arg("threads") = 1,
      "Flattened link-prediction report, e.g. report['filtered.mrr'].");

  m.def(
      "save_checkpoint",
      [](const ModelParams& model, const Dataset& dataset,
         const std::string& path) {
        SaveCheckpoint(model, MakeMetadata(model, dataset.vocabulary), path);
      },
      py::arg("model"), py::arg("dataset"), py::arg("path"));
  m.def(
      "load_checkpoint",
      [](const std::string& path, const Dataset* dataset) {
        Checkpoint c = LoadCheckpoint(path);
        if (dataset != nullptr) {
          CheckVocabulary(c.metadata, dataset->vocabulary, false);
        }
        return std::move(c.params);
      },
      py::arg("path"), py::arg("dataset") = nullptr,
      "Loads a model, checking the vocabulary when a dataset is given.");

  m.def(
      "param_count",
      [](const std::string& kind, std::int64_t num_entities,
         std::int64_t num_relations, std::int64_t dim_e, std::int64_t dim_r,
         std::int64_t bases) {
        return ParamCount(ParseModelKind(kind), num_entities, num_relations,
                          dim_e, dim_r, bases);
      },
      py::arg("kind"), py::arg("num_entities"), py::arg("num_relations"),
      py::arg("dim_e") = 50, py::arg("dim_r") = 50, py::arg("bases") = 5);
}
