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

#include <cstring>
#include <string>
#include <vector>

#include "factorboost/dataset.hpp"
#include "factorboost/relation.hpp"

namespace factorboost {

enum class PredicateOp { le, eq };  // numeric A <= v, categorical A == v

// One edge predicate of a tree path. The positive form selects the left
// child; `negated` selects the complement. Nulls follow the side recorded at
// training time via include_nulls.
struct SplitPredicate {
  FeatureRef attr;
  PredicateOp op = PredicateOp::le;
  double value = 0.0;
  uint32_t code = 0;
  bool negated = false;
  bool include_nulls = false;

  bool matches(const Column& col, size_t row) const {
    if (!col.is_valid(row)) return include_nulls;
    bool base = op == PredicateOp::le ? col.num[row] <= value : col.codes[row] == code;
    return negated ? !base : base;
  }

  uint64_t digest() const {
    uint64_t h = hash_str(attr.relation);
    h = hash_combine(h, hash_str(attr.column));
    h = hash_combine(h, op == PredicateOp::le ? 1 : 2);
    uint64_t bits = 0;
    std::memcpy(&bits, &value, sizeof(double));
    h = hash_combine(h, bits);
    h = hash_combine(h, code);
    h = hash_combine(h, (negated ? 2 : 0) | (include_nulls ? 1 : 0));
    return h;
  }

  std::string to_string() const;
};

using PredicateList = std::vector<SplitPredicate>;

// Rows of `rel` passing every predicate that targets it.
std::vector<uint32_t> select_rows(const Relation& rel, const std::string& rel_name,
                                  const PredicateList& preds);

bool relation_has_predicates(const std::string& rel_name, const PredicateList& preds);

// Order-independent digest of the predicates applying to one relation.
uint64_t relation_predicate_digest(const std::string& rel_name, const PredicateList& preds);

}  // namespace factorboost
