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
#include "factorboost/forest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace factorboost {

namespace {

// Per-row subtree counts of `rel` toward its parent: the product of incoming
// child-message counts (component 0).
struct SubtreeWeights {
  const Database* db;
  const MessageContext* ctx;
  const RootedTree* tree;
  std::map<std::string, std::vector<double>> weights;  // per relation row

  const std::vector<double>& of(const std::string& rel) {
    auto it = weights.find(rel);
    if (it != weights.end()) return it->second;
    const Relation& r = db->relation(rel);
    std::vector<double> w(r.row_count(), 1.0);
    auto cit = tree->children.find(rel);
    if (cit != tree->children.end()) {
      for (const std::string& child : cit->second) {
        int ei = tree->parent_edge.at(child);
        const JoinEdge& e = db->graph.edge(ei);
        const EdgeInfo& info = db->edge_info[static_cast<size_t>(ei)];
        std::shared_ptr<const Message> msg =
            compute_message(*ctx, DirectedEdge{ei, child, rel}, PredicateList{});
        const std::vector<uint32_t>& codes = info.codes_of(e, rel);
        for (size_t row = 0; row < w.size(); ++row) {
          double m = 0.0;
          uint32_t code = codes[row];
          if (code != EdgeInfo::kNullKey) {
            switch (msg->kind) {
              case MessageKind::identity:
                m = 1.0;
                break;
              case MessageKind::semijoin:
                m = msg->member[code] ? 1.0 : 0.0;
                break;
              case MessageKind::full: {
                int32_t slot = msg->slot_of_code[code];
                m = slot >= 0 ? msg->ann[0][static_cast<size_t>(slot)] : 0.0;
                break;
              }
            }
          }
          w[row] *= m;
        }
      }
    }
    return weights.emplace(rel, std::move(w)).first->second;
  }
};

size_t weighted_draw(Rng& rng, const std::vector<double>& weights, double total) {
  // Counts are integral, so an integer draw keeps probabilities exact.
  uint64_t t = static_cast<uint64_t>(std::llround(total));
  check(t > 0, "empty join result");
  uint64_t x = rng.below(t);
  uint64_t acc = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    acc += static_cast<uint64_t>(std::llround(weights[i]));
    if (x < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

double join_count(const Database& db) {
  MessageCache cache;
  MessageContext ctx;
  ctx.db = &db;
  ctx.sr = SemiRing::count_ring();
  ctx.cache = &cache;
  AnnotatedRelation total = absorb(ctx, db.graph.target_relation, {}, {});
  return total.row_count() == 0 ? 0.0 : total.annotation(0)[0];
}

std::vector<uint32_t> sample_fact_rows(size_t row_count, size_t n, uint64_t seed,
                                       bool with_replacement) {
  Rng rng(seed);
  std::vector<uint32_t> out;
  if (with_replacement) {
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) out.push_back(static_cast<uint32_t>(rng.below(row_count)));
    return out;
  }
  check(n <= row_count, "cannot sample more rows than exist without replacement");
  return rng.sample_without_replacement(static_cast<uint32_t>(row_count), static_cast<uint32_t>(n));
}

std::vector<JoinTuple> ancestral_sample(const Database& db, size_t n, uint64_t seed,
                                        bool with_replacement, const SemiRing* sr,
                                        const std::map<std::string, LiftSpec>* lifts) {
  MessageCache cache;
  MessageContext ctx;
  ctx.db = &db;
  ctx.sr = sr ? *sr : SemiRing::count_ring();
  if (lifts) ctx.lifts = *lifts;
  ctx.cache = &cache;

  RootedTree tree = root_at(db.graph, db.graph.target_relation);
  SubtreeWeights sw{&db, &ctx, &tree, {}};

  // Root marginals: per-tuple join counts / C.
  const std::vector<double>& root_w = sw.of(tree.root);
  double total = 0;
  for (double w : root_w) total += w;
  check(total > 0, "empty join result");
  if (!with_replacement) {
    check(static_cast<double>(n) <= total, "sample size exceeds join cardinality");
  }

  // Per-edge index: code -> candidate child rows.
  std::map<int, std::vector<std::vector<uint32_t>>> rows_by_code;
  auto candidates = [&](int ei, const std::string& child) -> const std::vector<std::vector<uint32_t>>& {
    auto it = rows_by_code.find(ei);
    if (it != rows_by_code.end()) return it->second;
    const JoinEdge& e = db.graph.edge(ei);
    const EdgeInfo& info = db.edge_info[static_cast<size_t>(ei)];
    std::vector<std::vector<uint32_t>> lists(info.code_space);
    const std::vector<uint32_t>& codes = info.codes_of(e, child);
    for (size_t r = 0; r < codes.size(); ++r) {
      if (codes[r] != EdgeInfo::kNullKey) lists[codes[r]].push_back(static_cast<uint32_t>(r));
    }
    return rows_by_code.emplace(ei, std::move(lists)).first->second;
  };

  Rng rng(seed);
  std::vector<JoinTuple> out;
  std::set<JoinTuple> seen;
  while (out.size() < n) {
    JoinTuple tuple;
    // Root draw by marginal probability, then conditional draws down the tree.
    std::function<void(const std::string&, uint32_t)> descend = [&](const std::string& rel, uint32_t row) {
      tuple.rows[rel] = row;
      auto cit = tree.children.find(rel);
      if (cit == tree.children.end()) return;
      for (const std::string& child : cit->second) {
        int ei = tree.parent_edge.at(child);
        const JoinEdge& e = db.graph.edge(ei);
        const EdgeInfo& info = db.edge_info[static_cast<size_t>(ei)];
        uint32_t code = info.codes_of(e, rel)[row];
        check(code != EdgeInfo::kNullKey, "sampled row lost its join key");
        const std::vector<uint32_t>& cand = candidates(ei, child)[code];
        check(!cand.empty(), "sampled row joins no child rows");
        const std::vector<double>& cw = sw.of(child);
        double ct = 0;
        std::vector<double> local(cand.size());
        for (size_t i = 0; i < cand.size(); ++i) {
          local[i] = cw[cand[i]];
          ct += local[i];
        }
        uint32_t chosen = cand[weighted_draw(rng, local, ct)];
        descend(child, chosen);
      }
    };
    size_t root_row = weighted_draw(rng, root_w, total);
    descend(tree.root, static_cast<uint32_t>(root_row));
    if (!with_replacement) {
      if (seen.count(tuple)) continue;  // redraw duplicates
      seen.insert(tuple);
    }
    out.push_back(std::move(tuple));
  }
  return out;
}

EnsembleModel train_random_forest(const Database& user_db, const ForestParams& params,
                                  ReaderGauge* gauge) {
  check(params.n_trees >= 1, "n_trees must be >= 1");
  check(params.sample.row_rate > 0 && params.sample.row_rate <= 1.0, "row_rate must be in (0, 1]");
  check(params.sample.feature_rate > 0 && params.sample.feature_rate <= 1.0,
        "feature_rate must be in (0, 1]");

  std::string fact;
  if (!user_db.graph.fact_relation.empty()) {
    fact = user_db.graph.fact_relation;
  } else {
    check(is_snowflake(user_db.graph, &fact),
          "random-forest row sampling needs a snowflake schema (or an explicit fact_relation)");
  }

  Database db = user_db.clone_with_private({fact});
  Relation& f = db.relation(fact);
  const size_t rows = f.row_count();
  check(rows > 0, "empty fact table");

  const Column& ycol = db.relation(db.target.relation).column(db.target.column);
  std::string criterion = params.criterion;
  if (criterion.empty()) criterion = ycol.kind == ColumnKind::numeric ? "variance" : "gini";
  TreeCriterion crit = criterion_from_name(criterion);

  EnsembleModel model;
  model.kind = ModelKind::rf;
  model.objective = criterion;
  model.schema_kind = detect_schema_kind(user_db);
  model.features = collect_features(user_db);
  if (crit != TreeCriterion::variance) {
    model.num_classes = static_cast<int>(ycol.dict->size());
    model.target_dict = ycol.dict;
  }

  // One bag-weight column per tree, all added up front so training tasks
  // only read.
  size_t n_rows_per_tree = std::max<size_t>(1, static_cast<size_t>(params.sample.row_rate *
                                                                   static_cast<double>(rows)));
  std::vector<std::string> weight_cols;
  for (int t = 0; t < params.n_trees; ++t) {
    Rng rng = Rng::for_stream(params.sample.seed, static_cast<uint64_t>(t) * 2);
    std::vector<double> w(rows, 0.0);
    for (uint32_t r : sample_fact_rows(rows, n_rows_per_tree, rng.next(),
                                       params.sample.with_replacement)) {
      w[r] += 1.0;
    }
    std::string name = "__w_" + std::to_string(t);
    Column col;
    col.name = name;
    col.kind = ColumnKind::numeric;
    col.num = std::move(w);
    f.add_column(std::move(col));
    weight_cols.push_back(std::move(name));
  }

  size_t n_feats = std::max<size_t>(
      1, static_cast<size_t>(params.sample.feature_rate * static_cast<double>(model.features.size())));

  std::vector<TreeModel> trees(static_cast<size_t>(params.n_trees));
  std::vector<MessageCache> caches(static_cast<size_t>(params.n_trees));

  auto train_one = [&](int t) {
    Rng rng = Rng::for_stream(params.sample.seed, static_cast<uint64_t>(t) * 2 + 1);
    std::vector<uint32_t> subset = rng.sample_without_replacement(
        static_cast<uint32_t>(model.features.size()), static_cast<uint32_t>(n_feats));
    std::sort(subset.begin(), subset.end());  // declaration order for the tie rule

    MessageContext ctx;
    ctx.db = &db;
    if (crit == TreeCriterion::variance) {
      ctx.sr = SemiRing::variance();
    } else {
      ctx.sr = SemiRing::class_count(model.num_classes);
    }
    if (db.target.relation == fact) {
      ctx.lifts[fact] = LiftSpec{db.target.column, {}, weight_cols[static_cast<size_t>(t)]};
    } else {
      ctx.lifts[db.target.relation] = LiftSpec{db.target.column, {}, ""};
      ctx.lifts[fact] = LiftSpec{"", {}, weight_cols[static_cast<size_t>(t)]};
    }
    ctx.cache = params.use_message_cache ? &caches[static_cast<size_t>(t)] : nullptr;

    TreeTrainInputs in;
    in.mctx = &ctx;
    in.features = &model.features;
    for (uint32_t fi : subset) in.candidate_features.push_back(static_cast<int>(fi));
    in.criterion = crit;
    in.params = params.tree;
    in.params.threads = 1;  // parallelism is across trees
    in.gauge = gauge;
    trees[static_cast<size_t>(t)] = train_tree_factorized(in);
  };

  if (params.tree.threads > 1 && params.n_trees > 1) {
    std::vector<TaskNode> tasks;
    for (int t = 0; t < params.n_trees; ++t) {
      TaskNode task;
      task.id = static_cast<uint64_t>(t);
      task.kind = TaskKind::sample;
      task.fn = [&, t]() { train_one(t); };
      tasks.push_back(std::move(task));
    }
    execute_dag(std::move(tasks), params.tree.threads);
  } else {
    for (int t = 0; t < params.n_trees; ++t) train_one(t);
  }

  model.trees = std::move(trees);
  return model;
}

}  // namespace factorboost
