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

#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "factorboost/annotated.hpp"

namespace factorboost {

// Group-by with semi-ring aggregation: one output row per distinct key in
// first-appearance order, annotation = sum of member annotations. Null key
// components group together (a separate null group per combination). Zero
// group attributes aggregate everything into a single row.
AnnotatedRelation groupby_aggregate(const AnnotatedRelation& rel,
                                    const std::vector<std::string>& group_attrs);

enum class JoinKind { inner, left_outer };

// Hash join on shared key columns; output annotation is the semi-ring product
// of the inputs. The probe side is the larger input so output order follows
// it deterministically. left_outer keeps unmatched left rows with their
// annotation unchanged (the right side contributes the one element) and
// right-side non-key attributes null.
AnnotatedRelation join_annotated(const AnnotatedRelation& left, const AnnotatedRelation& right,
                                 const std::vector<std::string>& keys, JoinKind kind = JoinKind::inner);

// Theta join: nested loop, predicate on (left row, right row); matched rows
// multiply annotations.
AnnotatedRelation theta_join(const AnnotatedRelation& left, const AnnotatedRelation& right,
                             const std::function<bool(size_t, size_t)>& predicate);

// Rows of rel whose key tuple appears in key_set; annotations unchanged.
AnnotatedRelation semijoin_filter(const AnnotatedRelation& rel, const std::vector<std::string>& keys,
                                  const AnnotatedRelation& key_set);

// Inclusive running sum in ascending order of a numeric or coded column.
// Requires one row per distinct value; a null row is emitted last with its
// own (non-accumulated) annotation so the missing-value split logic can
// allocate it to either side.
AnnotatedRelation prefix_sum_ordered(const AnnotatedRelation& grouped, const std::string& order_attr);

}  // namespace factorboost
