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

#include <cstdint>
#include <string>

namespace factorboost {

// Residual-update strategy timings over the synthetic star schema (one fact,
// one dimension, an n-leaf stump). Medians over `runs` repetitions.
struct UpdateBenchResult {
  double swap_seconds = 0;     // in-place annotation multiply + column swap
  double rebuild_seconds = 0;  // rebuild every fact column into a new table
  double naive_seconds = 0;    // materialize U, join it through the dimension
  double naive_over_swap = 0;  // speedup of swap vs naive
  double factorized_train_seconds = 0;  // stump training, factorized
  double naive_train_seconds = 0;       // stump training over the materialized join
  uint64_t factorized_peak_rows = 0;
  uint64_t naive_peak_rows = 0;
  size_t fact_rows = 0;
  size_t dim_rows = 0;
  int leaves = 0;

  std::string table() const;  // human-readable summary
};

UpdateBenchResult run_update_bench(size_t fact_rows, size_t dim_rows, int leaves, int extra_columns,
                                   int runs, uint64_t seed);

}  // namespace factorboost
