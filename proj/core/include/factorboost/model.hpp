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
#include <memory>
#include <string>
#include <vector>

#include "factorboost/objectives.hpp"
#include "factorboost/predicates.hpp"
#include "factorboost/semiring.hpp"

namespace factorboost {

struct FeatureInfo {
  FeatureRef ref;
  ColumnKind kind = ColumnKind::numeric;
  std::shared_ptr<Dictionary> dict;  // categorical features only
};

struct TreeNode {
  int id = -1;
  int parent = -1;
  int depth = 0;
  SplitPredicate edge_predicate;  // predicate from the parent edge (unused for the root)

  bool has_split = false;
  SplitPredicate split;  // positive (left) form; left matches, right is its complement
  int split_feature = -1;
  double reduction = 0.0;
  int left = -1;
  int right = -1;

  std::vector<double> leaf_value;  // size 1, or num_classes for classification
  AnnotationValue agg;             // aggregate cached at training time

  bool is_leaf() const { return left < 0; }
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // id == index, root == 0
  int num_classes = 1;

  const TreeNode& root() const { return nodes.front(); }

  std::vector<int> leaf_ids() const {
    std::vector<int> out;
    for (const TreeNode& n : nodes) {
      if (n.is_leaf()) out.push_back(n.id);
    }
    return out;
  }

  // Conjunction of edge predicates from the root to `id`.
  PredicateList path_predicates(int id) const {
    PredicateList preds;
    int cur = id;
    while (cur > 0) {
      preds.push_back(nodes[static_cast<size_t>(cur)].edge_predicate);
      cur = nodes[static_cast<size_t>(cur)].parent;
    }
    std::reverse(preds.begin(), preds.end());
    return preds;
  }
};

// (valid, numeric value, categorical code) for one feature of one row.
struct FeatureValue {
  bool valid = false;
  double num = 0.0;
  uint32_t code = 0;
};

using RowAccessor = std::function<FeatureValue(int feature_index)>;

// Deterministic leaf routing; nulls follow the side recorded at training.
int route_to_leaf(const TreeModel& tree, const RowAccessor& row);

// Leaf value of the routed leaf: one value for regression, a class
// distribution for classification.
const std::vector<double>& predict_tree(const TreeModel& tree, const RowAccessor& row);

enum class ModelKind { dt, rf, gbm };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::dt: return "dt";
    case ModelKind::rf: return "rf";
    case ModelKind::gbm: return "gbm";
  }
  return "?";
}

struct EnsembleModel {
  ModelKind kind = ModelKind::dt;
  std::string objective;  // objective name, or dt criterion (variance/gini/...)
  ObjectiveParams objective_params;
  double learning_rate = 1.0;
  double base_score = 0.0;
  std::vector<double> class_base_scores;  // softmax: one raw score per class
  int num_classes = 1;
  std::string schema_kind = "snowflake";  // snowflake | galaxy
  std::vector<FeatureInfo> features;
  std::shared_ptr<Dictionary> target_dict;  // classification targets
  std::vector<TreeModel> trees;

  bool is_classification() const { return num_classes > 1; }
};

// Ensemble prediction for one row: gbm returns base + lr * sum (per class for
// softmax); rf averages (regression) or majority-votes (classification,
// smaller class code wins ties); dt returns its single tree's value.
std::vector<double> predict_row(const EnsembleModel& model, const RowAccessor& row);

}  // namespace factorboost
