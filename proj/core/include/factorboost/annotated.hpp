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

#include <vector>

#include "factorboost/relation.hpp"
#include "factorboost/semiring.hpp"

namespace factorboost {

// A relation whose rows carry semi-ring annotations, stored as one parallel
// double column per semi-ring component.
struct AnnotatedRelation {
  Relation base;
  SemiRing sr = SemiRing::count_ring();
  std::vector<std::vector<double>> ann;  // [component][row]

  size_t row_count() const { return base.row_count(); }

  AnnotationValue annotation(size_t row) const {
    AnnotationValue v = sr.zero();
    for (size_t i = 0; i < ann.size(); ++i) v[i] = ann[i][row];
    return v;
  }

  void push_annotation(const AnnotationValue& v) {
    for (size_t i = 0; i < ann.size(); ++i) ann[i].push_back(v[i]);
  }

  void init_annotation_columns() { ann.assign(sr.arity(), {}); }

  void validate_shape() const {
    check(ann.size() == sr.arity(), "annotation column count must match semi-ring arity");
    for (const auto& col : ann) {
      check(col.size() == base.row_count(), "annotation length must equal row count");
    }
  }
};

// Annotates every row of `rel` with the same value (usually one).
AnnotatedRelation annotate_constant(const Relation& rel, const SemiRing& sr, const AnnotationValue& value);

// Annotates rows by lifting a numeric target column (variance/count) with an
// optional weight column; rows with a null target lift to zero contribution
// in s/q but still count unless the row weight handles it. Null targets are
// rejected: the target column must be complete.
AnnotatedRelation annotate_target(const Relation& rel, const SemiRing& sr, const std::string& y_column,
                                  const std::string& weight_column = "");

}  // namespace factorboost
