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
#include "factorboost/model.hpp"

#include <algorithm>

namespace factorboost {

namespace {

bool predicate_matches_value(const SplitPredicate& p, const FeatureValue& v) {
  if (!v.valid) return p.include_nulls;
  bool base = p.op == PredicateOp::le ? v.num <= p.value : v.code == p.code;
  return p.negated ? !base : base;
}

}  // namespace

int route_to_leaf(const TreeModel& tree, const RowAccessor& row) {
  int cur = 0;
  while (!tree.nodes[static_cast<size_t>(cur)].is_leaf()) {
    const TreeNode& n = tree.nodes[static_cast<size_t>(cur)];
    FeatureValue v = row(n.split_feature);
    cur = predicate_matches_value(n.split, v) ? n.left : n.right;
  }
  return cur;
}

const std::vector<double>& predict_tree(const TreeModel& tree, const RowAccessor& row) {
  return tree.nodes[static_cast<size_t>(route_to_leaf(tree, row))].leaf_value;
}

std::vector<double> predict_row(const EnsembleModel& model, const RowAccessor& row) {
  const int k = model.num_classes;
  switch (model.kind) {
    case ModelKind::dt: {
      return predict_tree(model.trees.front(), row);
    }
    case ModelKind::rf: {
      if (k <= 1) {
        double sum = 0;
        for (const TreeModel& t : model.trees) sum += predict_tree(t, row).front();
        return {sum / static_cast<double>(model.trees.size())};
      }
      // Majority vote over per-tree argmax; smaller class code wins ties.
      std::vector<int> votes(static_cast<size_t>(k), 0);
      for (const TreeModel& t : model.trees) {
        const std::vector<double>& probs = predict_tree(t, row);
        int arg = 0;
        for (int i = 1; i < k; ++i) {
          if (probs[static_cast<size_t>(i)] > probs[static_cast<size_t>(arg)]) arg = i;
        }
        ++votes[static_cast<size_t>(arg)];
      }
      std::vector<double> out(static_cast<size_t>(k), 0.0);
      for (int i = 0; i < k; ++i) {
        out[static_cast<size_t>(i)] =
            static_cast<double>(votes[static_cast<size_t>(i)]) / static_cast<double>(model.trees.size());
      }
      return out;
    }
    case ModelKind::gbm: {
      if (k <= 1) {
        double score = model.base_score;
        for (const TreeModel& t : model.trees) {
          score += model.learning_rate * predict_tree(t, row).front();
        }
        return {score};
      }
      // Softmax: trees come in per-class groups of k per iteration.
      std::vector<double> raw(static_cast<size_t>(k), 0.0);
      for (int i = 0; i < k; ++i) {
        raw[static_cast<size_t>(i)] =
            model.class_base_scores.empty() ? model.base_score : model.class_base_scores[static_cast<size_t>(i)];
      }
      for (size_t i = 0; i < model.trees.size(); ++i) {
        size_t cls = i % static_cast<size_t>(k);
        raw[cls] += model.learning_rate * predict_tree(model.trees[i], row).front();
      }
      return raw;
    }
  }
  return {0.0};
}

}  // namespace factorboost
