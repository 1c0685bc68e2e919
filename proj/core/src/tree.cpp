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
#include "factorboost/tree.hpp"

#include <algorithm>
#include <queue>

namespace factorboost {

TreeCriterion criterion_from_name(const std::string& name) {
  if (name == "variance") return TreeCriterion::variance;
  if (name == "gini") return TreeCriterion::gini;
  if (name == "entropy") return TreeCriterion::entropy;
  if (name == "chi_square") return TreeCriterion::chi_square;
  if (name == "boosting_gain") return TreeCriterion::boosting_gain;
  fail("unknown criterion '" + name + "'");
}

const char* criterion_name(TreeCriterion c) {
  switch (c) {
    case TreeCriterion::variance: return "variance";
    case TreeCriterion::gini: return "gini";
    case TreeCriterion::entropy: return "entropy";
    case TreeCriterion::chi_square: return "chi_square";
    case TreeCriterion::boosting_gain: return "boosting_gain";
  }
  return "?";
}

namespace {

double count_of(const AnnotationValue& a) { return a[0]; }

ClassCounts to_class_counts(const AnnotationValue& a) {
  ClassCounts cc;
  cc.c = a[0];
  cc.per_class.assign(a.v.begin() + 1, a.v.end());
  return cc;
}

// Gradient pair of an aggregate under the trainer's configuration: gradient
// semi-rings carry (c, h, g) (per class for the vector form); variance
// aggregates of residuals map to (H, G) = (C, -S).
GradPair grad_pair_of(const TreeTrainInputs& in, const AnnotationValue& a) {
  const SemiRing& sr = in.mctx->sr;
  if (sr.kind() == SemiRingKind::variance) return GradPair{a[0], -a[1]};
  size_t h = in.grad_class < 0 ? 1 : 1 + 2 * static_cast<size_t>(in.grad_class);
  return GradPair{a[h], a[h + 1]};
}

// Split score of (total, left) under the trainer's criterion. nullopt marks
// an invalid split (empty side / leaf-count floor).
std::optional<double> split_score(const TreeTrainInputs& in, const AnnotationValue& total,
                                  const AnnotationValue& left) {
  double c_left = count_of(left);
  double c_right = count_of(total) - c_left;
  if (c_left < in.params.min_leaf_count || c_right < in.params.min_leaf_count) return std::nullopt;
  switch (in.criterion) {
    case TreeCriterion::variance:
      return reduction_in_variance(total[0], total[1], left[0], left[1]);
    case TreeCriterion::gini:
      return classification_split_score(to_class_counts(total), to_class_counts(left),
                                        ClassificationCriterion::gini);
    case TreeCriterion::entropy:
      return classification_split_score(to_class_counts(total), to_class_counts(left),
                                        ClassificationCriterion::entropy);
    case TreeCriterion::chi_square:
      return classification_split_score(to_class_counts(total), to_class_counts(left),
                                        ClassificationCriterion::chi_square);
    case TreeCriterion::boosting_gain: {
      GradPair parent = grad_pair_of(in, total);
      GradPair l = grad_pair_of(in, left);
      GradPair r{parent.h - l.h, parent.g - l.g};
      if (!(c_left > 0) || !(c_right > 0)) return std::nullopt;
      if (!(l.h + in.params.beta > 0) || !(r.h + in.params.beta > 0)) return std::nullopt;
      return boosting_gain(parent, l, in.params.alpha, in.params.beta);
    }
  }
  return std::nullopt;
}

struct GroupRow {
  double num = 0;
  uint32_t code = 0;
  AnnotationValue ann;
};

}  // namespace

std::optional<SplitCandidate> best_split_feature(const TreeTrainInputs& in, const PredicateList& preds,
                                                 const AnnotationValue& node_total, int feature_index) {
  const MessageContext& ctx = *in.mctx;
  const FeatureInfo& feat = (*in.features)[static_cast<size_t>(feature_index)];
  AnnotatedRelation grouped = absorb(ctx, feat.ref.relation, preds, {feat.ref.column});

  const Column& col = grouped.base.column(feat.ref.column);
  std::vector<GroupRow> groups;
  AnnotationValue null_agg = ctx.sr.zero();
  bool has_null = false;
  for (size_t r = 0; r < grouped.row_count(); ++r) {
    if (grouped.ann[0][r] == 0.0) continue;  // zero-weight group carries no data
    if (!col.is_valid(r)) {
      null_agg = grouped.annotation(r);
      has_null = true;
      continue;
    }
    GroupRow g;
    if (col.kind == ColumnKind::numeric) {
      g.num = col.num[r];
    } else {
      g.code = col.codes[r];
    }
    g.ann = grouped.annotation(r);
    groups.push_back(std::move(g));
  }
  if (groups.empty()) return std::nullopt;  // constant-null or empty slice

  std::optional<SplitCandidate> best;
  auto consider = [&](const AnnotationValue& left_no_null, double num_value, uint32_t code_value,
                      bool allow_null_left, bool allow_null_right) {
    // Missing values go to whichever side scores better; without an observed
    // null group they are routed right.
    std::optional<double> score_right =
        allow_null_right ? split_score(in, node_total, left_no_null) : std::nullopt;
    std::optional<double> score_left;
    if (has_null && allow_null_left) {
      score_left = split_score(in, node_total, ctx.sr.add(left_no_null, null_agg));
    }
    bool nulls_left;
    std::optional<double> score;
    if (score_left && (!score_right || *score_left > *score_right)) {
      nulls_left = true;
      score = score_left;
    } else {
      nulls_left = false;
      score = score_right;
    }
    if (!score || !(*score > in.params.min_gain)) return;
    if (best && !(*score > best->reduction)) return;  // earlier threshold wins ties
    SplitCandidate cand;
    cand.feature_index = feature_index;
    cand.reduction = *score;
    cand.predicate.attr = feat.ref;
    cand.predicate.op = col.kind == ColumnKind::numeric ? PredicateOp::le : PredicateOp::eq;
    cand.predicate.value = num_value;
    cand.predicate.code = code_value;
    cand.predicate.negated = false;
    cand.predicate.include_nulls = nulls_left;
    cand.left_agg = nulls_left ? ctx.sr.add(left_no_null, null_agg) : left_no_null;
    cand.right_agg = ctx.sr.zero();
    for (size_t i = 0; i < ctx.sr.arity(); ++i) cand.right_agg[i] = node_total[i] - cand.left_agg[i];
    best = std::move(cand);
  };

  if (col.kind == ColumnKind::numeric) {
    std::sort(groups.begin(), groups.end(), [](const GroupRow& a, const GroupRow& b) { return a.num < b.num; });
    AnnotationValue prefix = ctx.sr.zero();
    for (size_t i = 0; i < groups.size(); ++i) {
      ctx.sr.accumulate(prefix.v.data(), groups[i].ann.v.data());
      bool last = i + 1 == groups.size();
      // The last threshold only separates nulls (right side empty otherwise).
      consider(prefix, groups[i].num, 0, !last, true);
    }
  } else {
    std::sort(groups.begin(), groups.end(), [](const GroupRow& a, const GroupRow& b) { return a.code < b.code; });
    for (const GroupRow& g : groups) {
      consider(g.ann, 0.0, g.code, true, true);
    }
  }
  return best;
}

std::optional<SplitCandidate> get_best_split(const TreeTrainInputs& in, const PredicateList& preds,
                                             const AnnotationValue& node_total,
                                             const std::vector<int>& feature_subset) {
  std::vector<std::optional<SplitCandidate>> results(feature_subset.size());
  if (in.params.threads > 1 && feature_subset.size() > 1) {
    std::vector<TaskNode> tasks;
    for (size_t i = 0; i < feature_subset.size(); ++i) {
      TaskNode t;
      t.id = i;
      t.kind = TaskKind::split_eval;
      t.fn = [&, i]() {
        if (in.gauge) in.gauge->enter();
        results[i] = best_split_feature(in, preds, node_total, feature_subset[i]);
        if (in.gauge) in.gauge->leave();
      };
      tasks.push_back(std::move(t));
    }
    execute_dag(std::move(tasks), in.params.threads);
  } else {
    for (size_t i = 0; i < feature_subset.size(); ++i) {
      if (in.gauge) in.gauge->enter();
      results[i] = best_split_feature(in, preds, node_total, feature_subset[i]);
      if (in.gauge) in.gauge->leave();
    }
  }
  std::optional<SplitCandidate> best;
  for (auto& r : results) {  // declaration order; strict > keeps the earlier feature
    if (!r) continue;
    if (!best || r->reduction > best->reduction) best = std::move(r);
  }
  return best;
}

void evict_dead_messages(const TreeTrainInputs& in, const std::vector<PredicateList>& frontier_preds) {
  MessageContext& ctx = *in.mctx;
  if (!ctx.cache) return;
  std::set<MessageCache::Key> live;
  const JoinGraph& graph = ctx.db->graph;
  for (const PredicateList& preds : frontier_preds) {
    for (size_t ei = 0; ei < graph.edges.size(); ++ei) {
      const JoinEdge& e = graph.edges[ei];
      for (const std::string& from : {e.rel_a, e.rel_b}) {
        DirectedEdge d{static_cast<int>(ei), from, e.other(from)};
        live.insert(message_key(ctx, d, preds));
      }
    }
  }
  ctx.cache->retain(live);
}

namespace {

struct FrontierEntry {
  int node_id;
  int depth;
  SplitCandidate cand;
};

struct BestFirstLess {
  GrowthPolicy growth;
  bool operator()(const FrontierEntry& a, const FrontierEntry& b) const {
    if (growth == GrowthPolicy::best_first) {
      if (a.cand.reduction != b.cand.reduction) return a.cand.reduction < b.cand.reduction;
      return a.node_id > b.node_id;
    }
    if (a.depth != b.depth) return a.depth > b.depth;  // least depth first
    return a.node_id > b.node_id;
  }
};

std::vector<double> leaf_value_for(const TreeTrainInputs& in, const AnnotationValue& agg, int k) {
  switch (in.criterion) {
    case TreeCriterion::variance: {
      double c = agg[0];
      return {c > 0 ? agg[1] / c : 0.0};
    }
    case TreeCriterion::gini:
    case TreeCriterion::entropy:
    case TreeCriterion::chi_square: {
      std::vector<double> probs(static_cast<size_t>(k), 0.0);
      double c = agg[0];
      for (int i = 0; i < k; ++i) probs[static_cast<size_t>(i)] = c > 0 ? agg[1 + i] / c : 0.0;
      return probs;
    }
    case TreeCriterion::boosting_gain: {
      GradPair gp = grad_pair_of(in, agg);
      return {optimal_leaf_prediction(gp, in.params.beta)};
    }
  }
  return {0.0};
}

}  // namespace

TreeModel train_tree_factorized(TreeTrainInputs& in) {
  MessageContext& ctx = *in.mctx;
  const Database& db = *ctx.db;

  AnnotatedRelation total_rel = absorb(ctx, db.graph.target_relation, {}, {});
  check(total_rel.row_count() == 1 && total_rel.annotation(0)[0] > 0,
        "training input is empty (no joinable rows)");
  AnnotationValue total = total_rel.annotation(0);

  int k = ctx.sr.kind() == SemiRingKind::class_count ? ctx.sr.num_classes() : 1;

  TreeModel tree;
  tree.num_classes = k;
  TreeNode root_node;
  root_node.id = 0;
  root_node.depth = 0;
  root_node.agg = total;
  tree.nodes.push_back(root_node);

  std::priority_queue<FrontierEntry, std::vector<FrontierEntry>, BestFirstLess> pq{
      BestFirstLess{in.params.growth}};

  auto eval_and_push = [&](int node_id, const std::vector<int>& allowed) {
    const TreeNode& node = tree.nodes[static_cast<size_t>(node_id)];
    if (node.depth >= in.params.max_depth) return;
    std::optional<SplitCandidate> cand =
        get_best_split(in, tree.path_predicates(node_id), node.agg, allowed);
    if (cand) pq.push(FrontierEntry{node_id, node.depth, std::move(*cand)});
  };

  std::vector<int> allowed = in.candidate_features;
  eval_and_push(0, allowed);

  int num_leaves = 1;
  while (!pq.empty() && num_leaves < in.params.max_leaves) {
    FrontierEntry entry = pq.top();
    pq.pop();
    TreeNode& node = tree.nodes[static_cast<size_t>(entry.node_id)];

    if (in.cpt && entry.node_id == 0) {
      // Lock descendants to the cluster of the root split's relation; pick
      // the smallest fact name when the relation sits in several clusters.
      const std::string& split_rel = entry.cand.predicate.attr.relation;
      const Cluster* chosen = nullptr;
      for (const Cluster& c : in.clusters) {
        if (c.members.count(split_rel)) {
          if (!chosen || c.fact < chosen->fact) chosen = &c;
        }
      }
      check(chosen != nullptr, "root split relation '" + split_rel + "' belongs to no cluster");
      in.chosen_cluster_fact = chosen->fact;
      std::vector<int> restricted;
      for (int fi : in.candidate_features) {
        if (chosen->members.count((*in.features)[static_cast<size_t>(fi)].ref.relation)) {
          restricted.push_back(fi);
        }
      }
      allowed = std::move(restricted);
    }

    node.has_split = true;
    node.split = entry.cand.predicate;
    node.split_feature = entry.cand.feature_index;
    node.reduction = entry.cand.reduction;

    TreeNode left, right;
    left.id = static_cast<int>(tree.nodes.size());
    right.id = left.id + 1;
    left.parent = right.parent = node.id;
    left.depth = right.depth = node.depth + 1;
    left.edge_predicate = entry.cand.predicate;
    right.edge_predicate = entry.cand.predicate;
    right.edge_predicate.negated = true;
    right.edge_predicate.include_nulls = !entry.cand.predicate.include_nulls;
    left.agg = entry.cand.left_agg;
    right.agg = entry.cand.right_agg;
    node.left = left.id;
    node.right = right.id;
    int left_id = left.id, right_id = right.id;
    tree.nodes.push_back(std::move(left));
    tree.nodes.push_back(std::move(right));
    ++num_leaves;

    if (num_leaves < in.params.max_leaves) {
      eval_and_push(left_id, allowed);
      eval_and_push(right_id, allowed);
    }

    // Drop cached messages no frontier node can reuse.
    if (ctx.cache) {
      std::vector<PredicateList> frontier;
      for (const TreeNode& n : tree.nodes) {
        if (n.is_leaf()) frontier.push_back(tree.path_predicates(n.id));
      }
      evict_dead_messages(in, frontier);
    }
  }

  for (TreeNode& n : tree.nodes) {
    if (n.is_leaf()) n.leaf_value = leaf_value_for(in, n.agg, k);
  }
  return tree;
}

}  // namespace factorboost
