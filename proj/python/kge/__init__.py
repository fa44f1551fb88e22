# Copyright 2026 The kge Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Translation-based knowledge graph embeddings (TransE/H/R/F)."""

from ._core import (
    CheckpointError,
    DataError,
    Dataset,
    EnergyConfig,
    Error,
    Model,
    NumericError,
    TrainConfig,
    UsageError,
    evaluate,
    init_model,
    load_checkpoint,
    load_dataset,
    param_count,
    random_dataset,
    save_checkpoint,
    train,
    transf_from_transe,
    world_dataset,
)

__all__ = [
    "CheckpointError",
    "DataError",
    "Dataset",
    "EnergyConfig",
    "Error",
    "Model",
    "NumericError",
    "TrainConfig",
    "UsageError",
    "evaluate",
    "init_model",
    "load_checkpoint",
    "load_dataset",
    "param_count",
    "random_dataset",
    "save_checkpoint",
    "train",
    "transf_from_transe",
    "world_dataset",
]
