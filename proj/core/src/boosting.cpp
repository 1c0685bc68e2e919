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
#include "factorboost/boosting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "factorboost/cuboid.hpp"

namespace factorboost {

namespace {

constexpr const char* kPredCol = "__pred";
constexpr const char* kYCol = "__y";
constexpr const char* kCntCol = "__cnt";
constexpr const char* kGCol = "__g";
constexpr const char* kHCol = "__h";

}  // namespace

std::vector<int64_t> resolve_row_map(const Database& db, const std::string& base,
                                     const std::string& target_rel) {
  std::vector<int64_t> map(db.relation(base).row_count());
  for (size_t i = 0; i < map.size(); ++i) map[i] = static_cast<int64_t>(i);
  if (base == target_rel) return map;
  RootedTree tree = root_at(db.graph, base);
  std::vector<std::string> path{target_rel};
  while (path.back() != base) {
    auto it = tree.parent.find(path.back());
    check(it != tree.parent.end(), "no join path from '" + base + "' to '" + target_rel + "'");
    path.push_back(it->second);
  }
  std::reverse(path.begin(), path.end());  // base ... target_rel
  for (size_t hop = 0; hop + 1 < path.size(); ++hop) {
    const std::string& u = path[hop];
    const std::string& v = path[hop + 1];
    int ei = tree.parent_edge.at(v);
    const JoinEdge& e = db.graph.edge(ei);
    const EdgeInfo& info = db.edge_info[static_cast<size_t>(ei)];
    const std::vector<uint32_t>& u_codes = info.codes_of(e, u);
    const std::vector<int32_t>& v_rows = v == e.rel_a ? info.row_of_code_a : info.row_of_code_b;
    check(!v_rows.empty(), "relation '" + v + "' must have unique keys on the path from '" + base + "'");
    for (size_t i = 0; i < map.size(); ++i) {
      if (map[i] < 0) continue;
      uint32_t code = u_codes[static_cast<size_t>(map[i])];
      map[i] = code == EdgeInfo::kNullKey ? -1 : v_rows[code];
      if (map[i] >= 0 && v_rows[code] < 0) map[i] = -1;
    }
  }
  return map;
}

namespace {

Cluster whole_graph_cluster(const Database& db, const std::string& fact) {
  Cluster c;
  c.fact = fact;
  for (const std::string& n : db.graph.nodes) c.members.insert(n);
  return c;
}

void add_numeric_column(Relation& rel, const std::string& name, std::vector<double> values) {
  Column col;
  col.name = name;
  col.kind = ColumnKind::numeric;
  col.num = std::move(values);
  rel.add_column(std::move(col));
}

double mean_loss(const ObjectiveSpec& obj, const std::vector<double>& y, const std::vector<double>& pred) {
  double total = 0;
  for (size_t i = 0; i < y.size(); ++i) total += obj.loss(y[i], pred[i]);
  double m = y.empty() ? 0.0 : total / static_cast<double>(y.size());
  return obj.name == "rmse" ? std::sqrt(m) : m;
}

}  // namespace

std::vector<FeatureInfo> collect_features(const Database& db) {
  std::vector<FeatureInfo> out;
  for (const FeatureRef& f : db.features) {
    const Column& col = db.relation(f.relation).column(f.column);
    FeatureInfo info;
    info.ref = f;
    info.kind = col.kind;
    info.dict = col.dict;
    out.push_back(std::move(info));
  }
  return out;
}

std::string detect_schema_kind(const Database& db) {
  return is_snowflake(db.graph) ? "snowflake" : "galaxy";
}

LeafSelection translate_predicate_to_semijoins(const Database& db, const Cluster& cluster,
                                               const TreeModel& tree, int leaf_id) {
  PredicateList preds = tree.path_predicates(leaf_id);
  for (const SplitPredicate& p : preds) {
    check(cluster.members.count(p.attr.relation),
          "predicate on '" + p.attr.qualified() + "' is not pushable to fact '" + cluster.fact + "'");
  }
  RootedTree rooted = root_at(db.graph, cluster.fact);

  LeafSelection sel;
  sel.leaf_id = leaf_id;
  for (const SplitPredicate& p : preds) {
    if (p.attr.relation == cluster.fact) sel.fact_predicates.push_back(p);
  }

  // Does any relation in the subtree of `rel` carry a predicate?
  std::function<bool(const std::string&)> subtree_has_preds = [&](const std::string& rel) -> bool {
    if (relation_has_predicates(rel, preds)) return true;
    auto it = rooted.children.find(rel);
    if (it == rooted.children.end()) return false;
    for (const std::string& ch : it->second) {
      if (subtree_has_preds(ch)) return true;
    }
    return false;
  };

  // Key membership (over the edge toward the parent) of sigma(subtree).
  std::function<std::vector<char>(const std::string&)> keyset = [&](const std::string& rel) {
    const Relation& r = db.relation(rel);
    std::vector<uint32_t> rows = select_rows(r, rel, preds);

    struct ChildFilter {
      const std::vector<uint32_t>* codes;
      std::vector<char> member;
    };
    std::vector<ChildFilter> child_filters;
    auto it = rooted.children.find(rel);
    if (it != rooted.children.end()) {
      for (const std::string& ch : it->second) {
        if (!subtree_has_preds(ch)) continue;
        int cei = rooted.parent_edge.at(ch);
        const JoinEdge& ce = db.graph.edge(cei);
        const EdgeInfo& cinfo = db.edge_info[static_cast<size_t>(cei)];
        child_filters.push_back(ChildFilter{&cinfo.codes_of(ce, rel), keyset(ch)});
      }
    }

    int ei = rooted.parent_edge.at(rel);
    const JoinEdge& e = db.graph.edge(ei);
    const EdgeInfo& info = db.edge_info[static_cast<size_t>(ei)];
    const std::vector<uint32_t>& out_codes = info.codes_of(e, rel);
    std::vector<char> member(info.code_space, 0);
    for (uint32_t row : rows) {
      bool pass = true;
      for (const ChildFilter& cf : child_filters) {
        uint32_t code = (*cf.codes)[row];
        if (code == EdgeInfo::kNullKey || !cf.member[code]) {
          pass = false;
          break;
        }
      }
      if (!pass) continue;
      uint32_t out = out_codes[row];
      if (out != EdgeInfo::kNullKey) member[out] = 1;
    }
    return member;
  };

  auto it = rooted.children.find(cluster.fact);
  if (it != rooted.children.end()) {
    for (const std::string& ch : it->second) {
      if (!subtree_has_preds(ch)) continue;
      int ei = rooted.parent_edge.at(ch);
      sel.filters.push_back(LeafSelection::KeyFilter{ei, keyset(ch)});
    }
  }
  return sel;
}

std::vector<char> leaf_fact_mask(const Database& db, const std::string& fact,
                                 const LeafSelection& selection) {
  const Relation& f = db.relation(fact);
  std::vector<char> mask(f.row_count(), 1);
  if (!selection.fact_predicates.empty()) {
    std::vector<const Column*> cols;
    for (const SplitPredicate& p : selection.fact_predicates) cols.push_back(&f.column(p.attr.column));
    for (size_t r = 0; r < f.row_count(); ++r) {
      for (size_t i = 0; i < cols.size(); ++i) {
        if (!selection.fact_predicates[i].matches(*cols[i], r)) {
          mask[r] = 0;
          break;
        }
      }
    }
  }
  for (const LeafSelection::KeyFilter& kf : selection.filters) {
    const JoinEdge& e = db.graph.edge(kf.edge_index);
    const EdgeInfo& info = db.edge_info[static_cast<size_t>(kf.edge_index)];
    const std::vector<uint32_t>& codes = info.codes_of(e, fact);
    for (size_t r = 0; r < f.row_count(); ++r) {
      if (!mask[r]) continue;
      uint32_t code = codes[r];
      if (code == EdgeInfo::kNullKey || !kf.member[code]) mask[r] = 0;
    }
  }
  return mask;
}

std::vector<int32_t> leaf_partition(const Database& db, const Cluster& cluster, const TreeModel& tree) {
  const Relation& f = db.relation(cluster.fact);
  std::vector<int32_t> partition(f.row_count(), -1);
  for (int leaf : tree.leaf_ids()) {
    LeafSelection sel = translate_predicate_to_semijoins(db, cluster, tree, leaf);
    std::vector<char> mask = leaf_fact_mask(db, cluster.fact, sel);
    for (size_t r = 0; r < mask.size(); ++r) {
      if (!mask[r]) continue;
      check(partition[r] < 0, "leaf selections overlap on fact row " + std::to_string(r) +
                                  " (leaves " + std::to_string(partition[r]) + " and " +
                                  std::to_string(leaf) + ")");
      partition[r] = leaf;
    }
  }
  for (size_t r = 0; r < partition.size(); ++r) {
    check(partition[r] >= 0, "fact row " + std::to_string(r) + " is covered by no leaf");
  }
  return partition;
}

AnnotationColumns annotation_columns() { return AnnotationColumns{"__ann_c", "__ann_s", "__ann_q"}; }

void ensure_annotation_columns(Relation& rel) {
  AnnotationColumns names = annotation_columns();
  if (rel.has_column(names.c)) return;
  add_numeric_column(rel, names.c, std::vector<double>(rel.row_count(), 1.0));
  add_numeric_column(rel, names.s, std::vector<double>(rel.row_count(), 0.0));
  add_numeric_column(rel, names.q, std::vector<double>(rel.row_count(), 0.0));
}

UpdateRelation build_update_relation(const Database& db, const TreeModel& tree,
                                     const std::vector<FeatureInfo>& features, double eta) {
  UpdateRelation u;
  u.tree = &tree;
  u.eta = eta;

  // Attribute set referenced by any leaf predicate, in first-use order.
  for (int leaf : tree.leaf_ids()) {
    for (const SplitPredicate& p : tree.path_predicates(leaf)) {
      if (std::find(u.attrs.begin(), u.attrs.end(), p.attr) == u.attrs.end()) u.attrs.push_back(p.attr);
    }
  }

  AnnotatedRelation cells = groupby_over_join(db, u.attrs, SemiRing::count_ring(), {});
  u.cells.set_name("U");
  u.cells.set_row_count(cells.base.row_count());
  for (const FeatureRef& a : u.attrs) {
    u.cells.add_column(cells.base.column(qualified_column_name(a)));
  }

  // Route each cell through the tree: predicates are exclusive and
  // exhaustive, so exactly one leaf matches.
  std::vector<double> neg_pred(u.cells.row_count(), 0.0);
  u.cell_leaf.assign(u.cells.row_count(), -1);
  for (size_t r = 0; r < u.cells.row_count(); ++r) {
    RowAccessor acc = [&](int feature_index) {
      const FeatureRef& ref = features[static_cast<size_t>(feature_index)].ref;
      const Column& col = u.cells.column(qualified_column_name(ref));
      FeatureValue v;
      v.valid = col.is_valid(r);
      if (v.valid) {
        if (col.kind == ColumnKind::numeric) {
          v.num = col.num[r];
        } else {
          v.code = col.codes[r];
        }
      }
      return v;
    };
    int leaf = route_to_leaf(tree, acc);
    u.cell_leaf[static_cast<size_t>(r)] = leaf;
    neg_pred[r] = -eta * tree.nodes[static_cast<size_t>(leaf)].leaf_value.front();
  }

  u.annotation.assign(3, std::vector<double>(u.cells.row_count()));
  for (size_t r = 0; r < u.cells.row_count(); ++r) {
    u.annotation[0][r] = 1.0;
    u.annotation[1][r] = neg_pred[r];
    u.annotation[2][r] = neg_pred[r] * neg_pred[r];
  }
  add_numeric_column(u.cells, "neg_prediction", std::move(neg_pred));
  return u;
}

void apply_update_relation(Database& db, const Cluster& cluster, const UpdateRelation& update) {
  Relation& fact = db.relation(cluster.fact);
  ensure_annotation_columns(fact);
  AnnotationColumns names = annotation_columns();

  std::vector<int32_t> partition = leaf_partition(db, cluster, *update.tree);

  const std::vector<double>& c = fact.column(names.c).num;
  const std::vector<double>& s = fact.column(names.s).num;
  const std::vector<double>& q = fact.column(names.q).num;
  std::vector<double> new_s(fact.row_count());
  std::vector<double> new_q(fact.row_count());
  for (size_t r = 0; r < fact.row_count(); ++r) {
    double p = update.eta * update.tree->nodes[static_cast<size_t>(partition[r])].leaf_value.front();
    new_s[r] = s[r] - p * c[r];
    new_q[r] = q[r] + p * p * c[r] - 2.0 * s[r] * p;
  }
  fact.swap_column(names.s, std::move(new_s));
  fact.swap_column(names.q, std::move(new_q));
}

void update_residuals_snowflake(Database& db, const std::string& fact, const TreeModel& tree,
                                const ObjectiveSpec& objective, double eta,
                                const std::string& y_column, const std::string& pred_column,
                                const std::string& g_column, const std::string& h_column) {
  Relation& f = db.relation(fact);
  std::vector<int32_t> partition = leaf_partition(db, whole_graph_cluster(db, fact), tree);
  const std::vector<double>& y = f.column(y_column).num;
  std::vector<double> pred = f.column(pred_column).num;
  for (size_t r = 0; r < f.row_count(); ++r) {
    pred[r] += eta * tree.nodes[static_cast<size_t>(partition[r])].leaf_value.front();
  }
  std::vector<double> g(f.row_count()), h(f.row_count());
  for (size_t r = 0; r < f.row_count(); ++r) {
    g[r] = objective.gradient(y[r], pred[r]);
    h[r] = objective.hessian(y[r], pred[r]);
  }
  f.swap_column(pred_column, std::move(pred));
  f.swap_column(g_column, std::move(g));
  f.swap_column(h_column, std::move(h));
}

double leaf_order_statistic(std::vector<double> residuals, LeafRule rule, double alpha) {
  check(!residuals.empty(), "order statistic of an empty leaf");
  if (rule == LeafRule::median) return percentile_lower(std::move(residuals), 0.5);
  check(rule == LeafRule::percentile, "leaf_order_statistic expects median or percentile");
  return percentile_lower(std::move(residuals), alpha);
}

namespace {

struct SnowflakeState {
  std::string fact;
  std::vector<double> y;        // per fact row (regression)
  std::vector<uint32_t> y_cls;  // classification
};

EnsembleModel train_gbm_snowflake(const Database& user_db, const GbmParams& params,
                                  std::vector<IterationLog>* log, ReaderGauge* gauge,
                                  const std::string& fact) {
  ObjectiveSpec obj = make_objective(params.objective, params.objective_params);
  check(!obj.multiclass, "softmax handled separately");

  Database db = user_db.clone_with_private({fact});
  Relation& f = db.relation(fact);
  const size_t n = f.row_count();
  check(n > 0, "empty fact table");

  // Materialize Y onto the fact (join path projection when Y is in a dim).
  std::vector<double> y(n);
  {
    std::vector<int64_t> map = resolve_row_map(db, fact, db.target.relation);
    const Column& ycol = user_db.relation(db.target.relation).column(db.target.column);
    check(ycol.kind == ColumnKind::numeric, "objective '" + obj.name + "' needs a numeric target");
    for (size_t r = 0; r < n; ++r) {
      check(map[r] >= 0, "fact row " + std::to_string(r) + " has no target (missing join key)");
      check(ycol.is_valid(static_cast<size_t>(map[r])), "target has null values");
      y[r] = ycol.num[static_cast<size_t>(map[r])];
    }
  }

  double base = obj.base_score(y);
  std::vector<double> pred(n, base);
  std::vector<double> g(n), h(n);
  for (size_t r = 0; r < n; ++r) {
    g[r] = obj.gradient(y[r], pred[r]);
    h[r] = obj.hessian(y[r], pred[r]);
  }
  add_numeric_column(f, kYCol, y);
  add_numeric_column(f, kPredCol, std::move(pred));
  add_numeric_column(f, kCntCol, std::vector<double>(n, 1.0));
  add_numeric_column(f, kHCol, std::move(h));
  add_numeric_column(f, kGCol, std::move(g));

  EnsembleModel model;
  model.kind = ModelKind::gbm;
  model.objective = obj.name;
  model.objective_params = obj.params;
  model.learning_rate = params.learning_rate;
  model.base_score = base;
  model.schema_kind = detect_schema_kind(user_db);
  model.features = collect_features(user_db);
  model.target_dict = nullptr;

  MessageCache cache;
  MessageContext ctx;
  ctx.db = &db;
  ctx.sr = SemiRing::gradient();
  ctx.lifts[fact] = LiftSpec{"", {kCntCol, kHCol, kGCol}, ""};
  ctx.cache = params.use_message_cache ? &cache : nullptr;
  ctx.debug_dump_dir = params.dump_messages_dir;

  Cluster cluster = whole_graph_cluster(db, fact);

  for (int iter = 0; iter < params.iterations; ++iter) {
    auto t0 = std::chrono::steady_clock::now();
    uint64_t computed0 = cache.computed_count(), reused0 = cache.reused_count();

    TreeTrainInputs in;
    in.mctx = &ctx;
    in.features = &model.features;
    for (int i = 0; i < static_cast<int>(model.features.size()); ++i) in.candidate_features.push_back(i);
    in.criterion = TreeCriterion::boosting_gain;
    in.params = params.tree;
    in.gauge = gauge;
    TreeModel tree = train_tree_factorized(in);

    // Order-statistic leaf rules need the per-leaf residuals (snowflake only).
    if (obj.leaf_rule == LeafRule::median || obj.leaf_rule == LeafRule::percentile) {
      std::vector<int32_t> partition = leaf_partition(db, cluster, tree);
      const std::vector<double>& ycol = f.column(kYCol).num;
      const std::vector<double>& pcol = f.column(kPredCol).num;
      std::map<int, std::vector<double>> residuals;
      for (size_t r = 0; r < n; ++r) residuals[partition[r]].push_back(ycol[r] - pcol[r]);
      for (auto& [leaf, res] : residuals) {
        tree.nodes[static_cast<size_t>(leaf)].leaf_value = {
            leaf_order_statistic(std::move(res), obj.leaf_rule, obj.params.quantile_alpha)};
      }
    }

    if (gauge) gauge->note_violation_if_active();
    update_residuals_snowflake(db, fact, tree, obj, params.learning_rate, kYCol, kPredCol, kGCol,
                               kHCol);
    model.trees.push_back(std::move(tree));

    if (log) {
      IterationLog row;
      row.iteration = iter + 1;
      row.train_metric = mean_loss(obj, f.column(kYCol).num, f.column(kPredCol).num);
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.messages_computed = cache.computed_count() - computed0;
      row.messages_reused = cache.reused_count() - reused0;
      log->push_back(row);
    }
  }
  return model;
}

EnsembleModel train_gbm_softmax(const Database& user_db, const GbmParams& params,
                                std::vector<IterationLog>* log, ReaderGauge* gauge,
                                const std::string& fact) {
  Database db = user_db.clone_with_private({fact});
  Relation& f = db.relation(fact);
  const size_t n = f.row_count();
  check(n > 0, "empty fact table");

  const Column& ycol_src = user_db.relation(db.target.relation).column(db.target.column);
  check(ycol_src.kind == ColumnKind::categorical, "softmax needs a categorical target");
  const int k = static_cast<int>(ycol_src.dict->size());
  check(k >= 2, "softmax needs at least two classes");

  std::vector<uint32_t> y(n);
  {
    std::vector<int64_t> map = resolve_row_map(db, fact, db.target.relation);
    for (size_t r = 0; r < n; ++r) {
      check(map[r] >= 0 && ycol_src.is_valid(static_cast<size_t>(map[r])), "target has missing values");
      y[r] = ycol_src.codes[static_cast<size_t>(map[r])];
    }
  }

  // Base scores: log of class priors.
  std::vector<double> base(static_cast<size_t>(k), 0.0);
  {
    std::vector<double> counts(static_cast<size_t>(k), 0.0);
    for (uint32_t c : y) counts[c] += 1.0;
    for (int i = 0; i < k; ++i) {
      base[static_cast<size_t>(i)] = std::log(std::max(counts[static_cast<size_t>(i)], 0.5) /
                                              static_cast<double>(n));
    }
  }

  std::vector<std::vector<double>> raw(static_cast<size_t>(k), std::vector<double>(n));
  for (int c = 0; c < k; ++c) std::fill(raw[c].begin(), raw[c].end(), base[static_cast<size_t>(c)]);

  std::vector<std::string> g_cols(static_cast<size_t>(k)), h_cols(static_cast<size_t>(k));
  add_numeric_column(f, kCntCol, std::vector<double>(n, 1.0));
  std::vector<std::string> lift_cols{kCntCol};
  for (int c = 0; c < k; ++c) {
    g_cols[c] = std::string(kGCol) + "_" + std::to_string(c);
    h_cols[c] = std::string(kHCol) + "_" + std::to_string(c);
    add_numeric_column(f, h_cols[c], std::vector<double>(n, 0.0));
    add_numeric_column(f, g_cols[c], std::vector<double>(n, 0.0));
    lift_cols.push_back(h_cols[c]);
    lift_cols.push_back(g_cols[c]);
  }

  auto refresh_grad = [&]() {
    std::vector<double> probs(static_cast<size_t>(k));
    std::vector<double> rawbuf(static_cast<size_t>(k));
    std::vector<std::vector<double>> g(static_cast<size_t>(k), std::vector<double>(n));
    std::vector<std::vector<double>> h(static_cast<size_t>(k), std::vector<double>(n));
    std::vector<double> gr, hr;
    for (size_t r = 0; r < n; ++r) {
      for (int c = 0; c < k; ++c) rawbuf[static_cast<size_t>(c)] = raw[static_cast<size_t>(c)][r];
      softmax_probs(rawbuf.data(), k, probs.data());
      softmax_grad_hess(probs, y[r], &gr, &hr);
      for (int c = 0; c < k; ++c) {
        g[static_cast<size_t>(c)][r] = gr[static_cast<size_t>(c)];
        h[static_cast<size_t>(c)][r] = hr[static_cast<size_t>(c)];
      }
    }
    for (int c = 0; c < k; ++c) {
      f.swap_column(g_cols[static_cast<size_t>(c)], std::move(g[static_cast<size_t>(c)]));
      f.swap_column(h_cols[static_cast<size_t>(c)], std::move(h[static_cast<size_t>(c)]));
    }
  };
  refresh_grad();

  EnsembleModel model;
  model.kind = ModelKind::gbm;
  model.objective = "softmax";
  model.learning_rate = params.learning_rate;
  model.base_score = 0.0;
  model.class_base_scores = base;
  model.num_classes = k;
  model.schema_kind = detect_schema_kind(user_db);
  model.features = collect_features(user_db);
  model.target_dict = ycol_src.dict;

  MessageCache cache;
  MessageContext ctx;
  ctx.db = &db;
  ctx.sr = SemiRing::gradient_vector(k);
  ctx.lifts[fact] = LiftSpec{"", lift_cols, ""};
  ctx.cache = params.use_message_cache ? &cache : nullptr;
  ctx.debug_dump_dir = params.dump_messages_dir;

  Cluster cluster = whole_graph_cluster(db, fact);

  for (int iter = 0; iter < params.iterations; ++iter) {
    auto t0 = std::chrono::steady_clock::now();
    uint64_t computed0 = cache.computed_count(), reused0 = cache.reused_count();
    std::vector<TreeModel> class_trees;
    for (int c = 0; c < k; ++c) {
      TreeTrainInputs in;
      in.mctx = &ctx;
      in.features = &model.features;
      for (int i = 0; i < static_cast<int>(model.features.size()); ++i) in.candidate_features.push_back(i);
      in.criterion = TreeCriterion::boosting_gain;
      in.params = params.tree;
      in.gauge = gauge;
      in.grad_class = c;
      class_trees.push_back(train_tree_factorized(in));
    }
    // Apply all class updates, then refresh gradients once.
    if (gauge) gauge->note_violation_if_active();
    for (int c = 0; c < k; ++c) {
      std::vector<int32_t> partition = leaf_partition(db, cluster, class_trees[static_cast<size_t>(c)]);
      for (size_t r = 0; r < n; ++r) {
        raw[static_cast<size_t>(c)][r] +=
            params.learning_rate *
            class_trees[static_cast<size_t>(c)].nodes[static_cast<size_t>(partition[r])].leaf_value.front();
      }
      model.trees.push_back(std::move(class_trees[static_cast<size_t>(c)]));
    }
    refresh_grad();

    if (log) {
      // Multiclass log-loss.
      double ll = 0;
      std::vector<double> probs(static_cast<size_t>(k)), rawbuf(static_cast<size_t>(k));
      for (size_t r = 0; r < n; ++r) {
        for (int c = 0; c < k; ++c) rawbuf[static_cast<size_t>(c)] = raw[static_cast<size_t>(c)][r];
        softmax_probs(rawbuf.data(), k, probs.data());
        ll -= std::log(std::max(probs[y[r]], 1e-15));
      }
      IterationLog row;
      row.iteration = iter + 1;
      row.train_metric = ll / static_cast<double>(n);
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.messages_computed = cache.computed_count() - computed0;
      row.messages_reused = cache.reused_count() - reused0;
      log->push_back(row);
    }
  }
  return model;
}

// Galaxy path: variance annotations stored on relations, residual updates by
// annotation multiplication on the tree's cluster fact.
EnsembleModel train_gbm_update_relation(const Database& user_db, const GbmParams& params,
                                        std::vector<IterationLog>* log, ReaderGauge* gauge) {
  check(params.objective == "rmse", "the update-relation path supports the rmse objective only");
  ObjectiveSpec obj = make_objective("rmse", params.objective_params);

  // Private copies: the target relation plus every cluster fact.
  std::vector<Cluster> clusters = compute_clusters(user_db.graph);
  std::set<std::string> privates{user_db.target.relation};
  for (const Cluster& c : clusters) privates.insert(c.fact);
  Database db = user_db.clone_with_private(privates);

  // Base score from the factorized total.
  MessageCache cache;
  MessageContext ctx;
  ctx.db = &db;
  ctx.sr = SemiRing::variance();
  ctx.cache = params.use_message_cache ? &cache : nullptr;
  ctx.debug_dump_dir = params.dump_messages_dir;
  ctx.lifts[db.target.relation] = LiftSpec{db.target.column, {}, ""};
  {
    const Column& ycol = db.relation(db.target.relation).column(db.target.column);
    check(ycol.kind == ColumnKind::numeric, "rmse needs a numeric target");
  }
  AnnotatedRelation total = absorb(ctx, db.graph.target_relation, {}, {});
  check(total.row_count() == 1 && total.annotation(0)[0] > 0, "empty join result");
  double base = total.annotation(0)[1] / total.annotation(0)[0];

  // Store residual annotations on the target relation: lift(y - base).
  {
    Relation& ry = db.relation(db.target.relation);
    AnnotationColumns names = annotation_columns();
    const Column& ycol = ry.column(db.target.column);
    std::vector<double> c(ry.row_count(), 1.0), s(ry.row_count()), q(ry.row_count());
    for (size_t r = 0; r < ry.row_count(); ++r) {
      check(ycol.is_valid(r), "target has null values");
      double resid = ycol.num[r] - base;
      s[r] = resid;
      q[r] = resid * resid;
    }
    add_numeric_column(ry, names.c, std::move(c));
    add_numeric_column(ry, names.s, std::move(s));
    add_numeric_column(ry, names.q, std::move(q));
    ctx.lifts[db.target.relation] = LiftSpec{"", {names.c, names.s, names.q}, ""};
  }

  EnsembleModel model;
  model.kind = ModelKind::gbm;
  model.objective = "rmse";
  model.learning_rate = params.learning_rate;
  model.base_score = base;
  model.schema_kind = detect_schema_kind(user_db);
  model.features = collect_features(user_db);

  AnnotationColumns names = annotation_columns();
  for (int iter = 0; iter < params.iterations; ++iter) {
    auto t0 = std::chrono::steady_clock::now();
    uint64_t computed0 = cache.computed_count(), reused0 = cache.reused_count();

    TreeTrainInputs in;
    in.mctx = &ctx;
    in.features = &model.features;
    for (int i = 0; i < static_cast<int>(model.features.size()); ++i) in.candidate_features.push_back(i);
    in.criterion = TreeCriterion::boosting_gain;  // (H, G) = (C, -S) over residual annotations
    in.params = params.tree;
    in.gauge = gauge;
    in.cpt = true;
    in.clusters = clusters;
    TreeModel tree = train_tree_factorized(in);

    // Root-only trees have no predicates; apply to the lexicographically
    // smallest cluster fact.
    const Cluster* cluster = nullptr;
    if (!in.chosen_cluster_fact.empty()) {
      for (const Cluster& c : clusters) {
        if (c.fact == in.chosen_cluster_fact) cluster = &c;
      }
    } else {
      cluster = &clusters.front();
    }
    check(cluster != nullptr, "no cluster chosen for residual update");

    UpdateRelation u = build_update_relation(db, tree, model.features, params.learning_rate);
    if (gauge) gauge->note_violation_if_active();
    apply_update_relation(db, *cluster, u);
    if (!ctx.lifts.count(cluster->fact)) {
      ctx.lifts[cluster->fact] = LiftSpec{"", {names.c, names.s, names.q}, ""};
    }
    model.trees.push_back(std::move(tree));

    if (log) {
      AnnotatedRelation after = absorb(ctx, db.graph.target_relation, {}, {});
      VarianceTriple vt{after.annotation(0)[0], after.annotation(0)[1], after.annotation(0)[2]};
      IterationLog row;
      row.iteration = iter + 1;
      row.train_metric = std::sqrt(std::max(vt.q / vt.c, 0.0));  // rmse of residuals
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.messages_computed = cache.computed_count() - computed0;
      row.messages_reused = cache.reused_count() - reused0;
      log->push_back(row);
    }
  }
  return model;
}

}  // namespace

EnsembleModel train_gbm(const Database& db, const GbmParams& params,
                        std::vector<IterationLog>* log, ReaderGauge* gauge) {
  check(params.iterations >= 1, "iterations must be >= 1");
  ResidualStrategy strategy = params.strategy;
  std::string fact;
  bool snowflake = is_snowflake(db.graph, &fact);
  if (!db.graph.fact_relation.empty()) fact = db.graph.fact_relation;
  if (strategy == ResidualStrategy::automatic) {
    strategy = snowflake ? ResidualStrategy::snowflake : ResidualStrategy::update_relation;
  }
  if (strategy == ResidualStrategy::snowflake) {
    check(snowflake, "the snowflake residual strategy requires a snowflake schema");
    ObjectiveSpec obj = make_objective(params.objective, params.objective_params);
    if (obj.multiclass) return train_gbm_softmax(db, params, log, gauge, fact);
    return train_gbm_snowflake(db, params, log, gauge, fact);
  }
  return train_gbm_update_relation(db, params, log, gauge);
}

EnsembleModel train_decision_tree(const Database& db, const DtParams& params, ReaderGauge* gauge) {
  const Column& ycol = db.relation(db.target.relation).column(db.target.column);
  std::string criterion = params.criterion;
  if (criterion.empty()) {
    criterion = ycol.kind == ColumnKind::numeric ? "variance" : "gini";
  }
  TreeCriterion crit = criterion_from_name(criterion);

  EnsembleModel model;
  model.kind = ModelKind::dt;
  model.objective = criterion;
  model.schema_kind = detect_schema_kind(db);
  model.features = collect_features(db);

  MessageCache cache;
  MessageContext ctx;
  ctx.db = &db;
  if (crit == TreeCriterion::variance) {
    check(ycol.kind == ColumnKind::numeric, "variance criterion needs a numeric target");
    ctx.sr = SemiRing::variance();
  } else {
    check(ycol.kind == ColumnKind::categorical, "classification criteria need a categorical target");
    check(crit != TreeCriterion::boosting_gain, "boosting_gain is not a decision-tree criterion");
    model.num_classes = static_cast<int>(ycol.dict->size());
    model.target_dict = ycol.dict;
    ctx.sr = SemiRing::class_count(model.num_classes);
  }
  ctx.lifts[db.target.relation] = LiftSpec{db.target.column, {}, ""};
  ctx.cache = params.use_message_cache ? &cache : nullptr;
  ctx.debug_dump_dir = params.dump_messages_dir;

  TreeTrainInputs in;
  in.mctx = &ctx;
  in.features = &model.features;
  for (int i = 0; i < static_cast<int>(model.features.size()); ++i) in.candidate_features.push_back(i);
  in.criterion = crit;
  in.params = params.tree;
  in.gauge = gauge;
  model.trees.push_back(train_tree_factorized(in));
  return model;
}

}  // namespace factorboost
