/*
 * Copyright 2026 The FactorBoost Authors
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
#pragma once

#include "factorboost/boosting.hpp"
#include "factorboost/rng.hpp"

namespace factorboost {

struct SampleSpec {
  double row_rate = 0.1;
  double feature_rate = 0.8;
  bool with_replacement = false;
  uint64_t seed = 0;
};

// One sampled tuple of the (non-materialized) join: a row index per relation.
struct JoinTuple {
  std::map<std::string, uint32_t> rows;

  bool operator<(const JoinTuple& o) const { return rows < o.rows; }
  bool operator==(const JoinTuple& o) const { return rows == o.rows; }
};

// Ancestral sampling over the join graph: a weighted draw at the root by the
// count-message marginals, then conditional draws down the tree. Marginals
// are read from the count component of `sr` messages (coalesced with the
// criterion when one is supplied), never from a materialized join.
std::vector<JoinTuple> ancestral_sample(const Database& db, size_t n, uint64_t seed,
                                        bool with_replacement,
                                        const SemiRing* sr = nullptr,
                                        const std::map<std::string, LiftSpec>* lifts = nullptr);

// Exact join cardinality via count messages (used by the sampler and tests).
double join_count(const Database& db);

// Snowflake fast path: uniform fact-row sample.
std::vector<uint32_t> sample_fact_rows(size_t row_count, size_t n, uint64_t seed,
                                       bool with_replacement);

struct ForestParams {
  int n_trees = 10;
  SampleSpec sample;
  TrainParams tree;
  std::string criterion;  // empty = default by target kind
  bool use_message_cache = true;
};

// Bagged decision trees: per tree a seeded fact-row sample (bag weights on
// the fact table) and a feature subset; trees train in parallel as
// independent task groups with per-tree message caches.
EnsembleModel train_random_forest(const Database& db, const ForestParams& params,
                                  ReaderGauge* gauge = nullptr);

}  // namespace factorboost
