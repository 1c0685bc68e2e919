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

#include "factorboost/dataset.hpp"
#include "factorboost/rng.hpp"

namespace factorboost {

// Column construction helpers for generated datasets.
Column make_numeric_column(const std::string& name, std::vector<double> values);
Column make_key_column(const std::string& name, std::vector<uint32_t> codes,
                       std::shared_ptr<Dictionary> dict);
Column make_categorical_column(const std::string& name, std::vector<uint32_t> codes,
                               std::shared_ptr<Dictionary> dict);
std::shared_ptr<Dictionary> dictionary_of_size(uint32_t n);

struct SnowflakeOptions {
  int min_relations = 2;
  int max_relations = 5;
  int max_fact_rows = 1000;
  int min_features = 2;
  int max_features = 6;
  bool allow_nulls = true;        // occasional nulls in feature columns
  bool categorical_target = false;
  int num_classes = 3;
  bool target_on_dim_allowed = true;
};

// Seeded random snowflake database: one fact, a random tree of dimensions
// under it (all edges N:1 toward the leaves), integer-valued target,
// numeric/categorical features spread over the relations. Keys are complete
// so the fact is 1-1 with the join.
Database random_snowflake(uint64_t seed, const SnowflakeOptions& options = {});

// Seeded 2-fact galaxy: F1 - Dim - F2 with both facts on the N side of the
// shared dimension, features on all three relations, integer target on F1.
Database random_galaxy(uint64_t seed, int max_fact_rows = 500);

// Star whose center joins each leaf 1-to-many, so the join expands:
// |join| = center_rows * fanout^2 while the base relations stay small.
Database star_expansion(size_t center_rows, size_t fanout, uint64_t seed);

// The residual-update benchmark schema: F[d, y, extra...] at fact_rows joined
// N:1 to D[d, feat] at dim_rows.
Database bench_schema(size_t fact_rows, size_t dim_rows, int extra_columns, uint64_t seed);

// Small fixed snowflake whose variance tree has three leaves:
// (d <= 1, p=2.5), (d > 1 & c <= 1, p=1.5), (d > 1 & c > 1, p=2); its total
// variance aggregate is (8, 16, 36).
Database example_star();

// Chain R[b,y] - S[b,c] - T[c,d] with the target in R; used by the message
// sharing and invalidation examples.
Database example_chain();

}  // namespace factorboost
