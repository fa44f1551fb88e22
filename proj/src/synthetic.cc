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

#include "kge/synthetic.h"

#include <algorithm>
#include <optional>
#include <random>
#include <set>

namespace kge {

Dataset RandomDataset(std::int32_t num_entities, std::int32_t num_relations,
                      std::int64_t num_triples, std::uint64_t seed) {
  if (num_entities < 2 || num_relations < 1 || num_triples < 1) {
    throw UsageError("random dataset needs >= 2 entities, >= 1 relation and "
                     ">= 1 triple");
  }
  Dataset d;
  for (std::int32_t i = 0; i < num_entities; ++i) {
    d.vocabulary.AddEntity("e" + std::to_string(i));
  }
  for (std::int32_t i = 0; i < num_relations; ++i) {
    d.vocabulary.AddRelation("r" + std::to_string(i));
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<EntityId> entity(0, num_entities - 1);
  std::uniform_int_distribution<RelationId> relation(0, num_relations - 1);
  d.train.reserve(static_cast<std::size_t>(num_triples));
  for (std::int64_t i = 0; i < num_triples; ++i) {
    const EntityId h = entity(rng);
    const RelationId r = relation(rng);
    d.train.push_back({h, r, entity(rng)});
  }
  return d;
}

Dataset WorldDataset(const WorldOptions& o) {
  if (o.people < 2 || o.cities < 1 || o.companies < 1 || o.countries < 1 ||
      o.cities < o.countries) {
    throw UsageError("world needs >= 2 people and at least as many cities as "
                     "countries");
  }
  std::mt19937_64 rng(o.seed);
  Dataset d;
  Vocabulary& v = d.vocabulary;
  auto add_group = [&](const char* prefix, std::int32_t n) {
    std::vector<EntityId> ids;
    for (std::int32_t i = 0; i < n; ++i) {
      ids.push_back(v.AddEntity(std::string(prefix) + std::to_string(i)));
    }
    return ids;
  };
  const auto people = add_group("person_", o.people);
  const auto cities = add_group("city_", o.cities);
  const auto companies = add_group("company_", o.companies);
  const auto countries = add_group("country_", o.countries);

  const RelationId lives_in = v.AddRelation("lives_in");
  const RelationId works_at = v.AddRelation("works_at");
  const RelationId nationality = v.AddRelation("nationality");
  const RelationId has_resident = v.AddRelation("has_resident");
  const RelationId employs = v.AddRelation("employs");
  const RelationId city_in_country = v.AddRelation("city_in_country");
  const RelationId country_has_city = v.AddRelation("country_has_city");
  const RelationId neighbor_of = v.AddRelation("neighbor_of");
  const RelationId colleague_of = v.AddRelation("colleague_of");
  const RelationId spouse_of = v.AddRelation("spouse_of");
  const RelationId capital_of = v.AddRelation("capital_of");
  const RelationId headquartered_in = v.AddRelation("headquartered_in");

  auto pick = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  };
  // Every country gets at least one city; the first city of each is its
  // capital.
  std::vector<std::size_t> country_of(cities.size());
  for (std::size_t c = 0; c < cities.size(); ++c) {
    country_of[c] = c < countries.size() ? c : pick(countries.size());
  }
  std::vector<std::size_t> city_of(people.size()), company_of(people.size());
  for (std::size_t p = 0; p < people.size(); ++p) {
    city_of[p] = pick(cities.size());
    company_of[p] = pick(companies.size());
  }

  std::vector<Triple> all;
  for (std::size_t p = 0; p < people.size(); ++p) {
    const EntityId person = people[p];
    const EntityId city = cities[city_of[p]];
    const EntityId company = companies[company_of[p]];
    all.push_back({person, lives_in, city});
    all.push_back({person, works_at, company});
    all.push_back({person, nationality, countries[country_of[city_of[p]]]});
    all.push_back({city, has_resident, person});
    all.push_back({company, employs, person});
  }
  for (std::size_t c = 0; c < cities.size(); ++c) {
    all.push_back({cities[c], city_in_country, countries[country_of[c]]});
    all.push_back({countries[country_of[c]], country_has_city, cities[c]});
    if (c < countries.size()) {
      all.push_back({cities[c], capital_of, countries[c]});
    }
  }
  for (std::size_t k = 0; k < companies.size(); ++k) {
    all.push_back({companies[k], headquartered_in, cities[pick(cities.size())]});
  }
  // Pairs are collected in a set so that sparse links drawn from both ends
  // are not duplicated.
  std::set<std::pair<std::size_t, std::size_t>> neighbors, colleagues;
  const auto link = [&](const std::vector<std::size_t>& group_of,
                        std::int32_t links, auto& pairs) {
    for (std::size_t a = 0; a < people.size(); ++a) {
      std::vector<std::size_t> mates;
      for (std::size_t b = 0; b < people.size(); ++b) {
        if (a != b && group_of[a] == group_of[b]) mates.push_back(b);
      }
      if (links > 0 && mates.size() > static_cast<std::size_t>(links)) {
        std::shuffle(mates.begin(), mates.end(), rng);
        mates.resize(static_cast<std::size_t>(links));
      }
      for (std::size_t b : mates) {
        pairs.insert({a, b});
        pairs.insert({b, a});
      }
    }
  };
  link(city_of, o.neighbor_links, neighbors);
  link(company_of, o.colleague_links, colleagues);
  for (const auto& [a, b] : neighbors) {
    all.push_back({people[a], neighbor_of, people[b]});
  }
  for (const auto& [a, b] : colleagues) {
    all.push_back({people[a], colleague_of, people[b]});
  }
  std::vector<std::size_t> order(people.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
    all.push_back({people[order[i]], spouse_of, people[order[i + 1]]});
    all.push_back({people[order[i + 1]], spouse_of, people[order[i]]});
  }

  std::shuffle(all.begin(), all.end(), rng);
  const auto held_out_relation = [&](RelationId r) {
    return r == lives_in || r == works_at || r == nationality ||
           r == has_resident || r == employs || r == neighbor_of ||
           r == colleague_of || r == spouse_of;
  };
  // A held-out fact takes its inverse with it, so the answer cannot be read
  // off a train triple with the ends swapped.
  const auto inverse = [&](const Triple& t) -> std::optional<Triple> {
    if (t.relation == lives_in) return Triple{t.tail, has_resident, t.head};
    if (t.relation == has_resident) return Triple{t.tail, lives_in, t.head};
    if (t.relation == works_at) return Triple{t.tail, employs, t.head};
    if (t.relation == employs) return Triple{t.tail, works_at, t.head};
    if (t.relation == neighbor_of || t.relation == colleague_of ||
        t.relation == spouse_of) {
      return Triple{t.tail, t.relation, t.head};
    }
    return std::nullopt;
  };
  std::vector<std::int32_t> degree(static_cast<std::size_t>(v.num_entities()));
  for (const Triple& t : all) {
    ++degree[static_cast<std::size_t>(t.head)];
    ++degree[static_cast<std::size_t>(t.tail)];
  }
  const auto total = static_cast<double>(all.size());
  const auto want_test = static_cast<std::size_t>(o.test_fraction * total);
  const auto want_valid = static_cast<std::size_t>(o.valid_fraction * total);
  std::set<Triple> held_out;
  for (const Triple& t : all) {
    if (held_out.contains(t)) continue;
    auto& dh = degree[static_cast<std::size_t>(t.head)];
    auto& dt = degree[static_cast<std::size_t>(t.tail)];
    const std::optional<Triple> inv = inverse(t);
    // Each end loses one (or two, with the inverse) train facts.
    const std::int32_t cost = inv ? 2 : 1;
    const bool movable =
        held_out_relation(t.relation) && dh > 2 * cost && dt > 2 * cost;
    std::vector<Triple>* split = nullptr;
    if (movable && d.test.size() < want_test) {
      split = &d.test;
    } else if (movable && d.valid.size() < want_valid) {
      split = &d.valid;
    }
    if (split == nullptr) {
      d.train.push_back(t);
      continue;
    }
    split->push_back(t);
    held_out.insert(t);
    if (inv) {
      split->push_back(*inv);
      held_out.insert(*inv);
    }
    dh -= cost;
    dt -= cost;
  }
  // Inverses that were reached before their partner went to train; drop
  // them from train now that the partner is held out.
  std::erase_if(d.train, [&](const Triple& t) { return held_out.contains(t); });
  return d;
}

}  // namespace kge
