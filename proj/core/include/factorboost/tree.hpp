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

#include <optional>
#include <set>

#include "factorboost/messages.hpp"
#include "factorboost/model.hpp"
#include "factorboost/scheduler.hpp"

namespace factorboost {

enum class GrowthPolicy { best_first, depth_wise };

enum class TreeCriterion { variance, gini, entropy, chi_square, boosting_gain };

TreeCriterion criterion_from_name(const std::string& name);
const char* criterion_name(TreeCriterion c);

struct TrainParams {
  int max_leaves = 31;
  int max_depth = 32;  // depth in edges from the root
  double min_leaf_count = 1.0;
  double min_gain = 0.0;  // split only when reduction > min_gain
  double alpha = 0.0;     // per-leaf penalty (boosting gain)
  double beta = 1e-6;     // hessian regularizer, strictly positive
  GrowthPolicy growth = GrowthPolicy::best_first;
  int threads = 1;
};

struct SplitCandidate {
  SplitPredicate predicate;  // positive form; include_nulls set per the better side
  int feature_index = -1;    // position in the trainer's feature table
  double reduction = 0.0;
  AnnotationValue left_agg;
  AnnotationValue right_agg;
};

// Inputs for one factorized tree build. The caller owns the message context
// (semi-ring + lifts) and cache; samples enter through lift weight columns.
struct TreeTrainInputs {
  MessageContext* mctx = nullptr;
  const std::vector<FeatureInfo>* features = nullptr;
  std::vector<int> candidate_features;  // indices into features, declaration order
  TreeCriterion criterion = TreeCriterion::variance;
  TrainParams params;
  ReaderGauge* gauge = nullptr;

  // boosting_gain reads gradient pairs from the annotation. With the
  // gradient-vector semi-ring this picks the class being trained; with the
  // variance semi-ring (galaxy rmse) pairs are derived as (H, G) = (C, -S).
  int grad_class = -1;

  // Clustered-predicate-tree mode: after the root split, candidates are
  // confined to the cluster of the root split's relation.
  bool cpt = false;
  std::vector<Cluster> clusters;
  // Filled by the trainer when cpt is set.
  std::string chosen_cluster_fact;
};

// Per-feature best split of one node: absorb grouped by the feature at the
// feature's relation, running prefix for numeric thresholds (A <= v at
// observed values), one-vs-rest for categoricals; missing values are
// allocated to whichever side scores better.
std::optional<SplitCandidate> best_split_feature(const TreeTrainInputs& in, const PredicateList& preds,
                                                 const AnnotationValue& node_total, int feature_index);

// Best over the candidate features; ties break by declaration order, then
// smaller threshold / category code.
std::optional<SplitCandidate> get_best_split(const TreeTrainInputs& in, const PredicateList& preds,
                                             const AnnotationValue& node_total,
                                             const std::vector<int>& feature_subset);

// Best-first (or depth-wise) growth over the join graph; leaf predictions are
// the criterion's defaults (mean for variance, class distribution for
// class counts, -G/(H+beta) for gradients).
TreeModel train_tree_factorized(TreeTrainInputs& in);

// Drops cached messages that no live frontier node can reuse.
void evict_dead_messages(const TreeTrainInputs& in, const std::vector<PredicateList>& frontier_preds);

}  // namespace factorboost
