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

// Generated knowledge graphs for benchmarks and end-to-end tests.

#ifndef KGE_SYNTHETIC_H_
#define KGE_SYNTHETIC_H_

#include <cstdint>

#include "kge/dataset.h"

namespace kge {

// Uniformly random triples over the given vocabulary sizes; every triple
// lands in train. Used for timing, not for learning.
Dataset RandomDataset(std::int32_t num_entities, std::int32_t num_relations,
                      std::int64_t num_triples, std::uint64_t seed);

struct WorldOptions {
  std::int32_t people = 150;
  std::int32_t cities = 30;
  std::int32_t companies = 5;
  std::int32_t countries = 15;
  // neighbor_of / colleague_of partners drawn per person among the people
  // sharing the city / company (both directions are added). 0 links every
  // such pair.
  std::int32_t neighbor_links = 1;
  std::int32_t colleague_links = 8;
  double valid_fraction = 0.05;
  double test_fraction = 0.10;
  std::uint64_t seed = 7;
};

// A small "people, places and employers" world with 12 relations. Each person
// lives in one city and works at one company, chosen independently, so the
// N-to-1 relations lives_in / works_at / nationality and their 1-to-N
// inverses put conflicting demands on a single entity embedding. Also holds
// N-to-N (neighbor_of, colleague_of) and 1-to-1 (spouse_of, capital_of)
// relations. Valid and test triples are drawn from the person-level
// relations together with their inverses, and never take the last train
// facts of an entity. The defaults give 200 entities and about 2,850 train
// triples; few neighbour links against many colleague links make the city
// of a person hard to recover from a single embedding point.
Dataset WorldDataset(const WorldOptions& options = {});

}  // namespace kge

#endif  // KGE_SYNTHETIC_H_
