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
#include "factorboost/cuboid.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace factorboost {

std::vector<std::vector<double>> lift_rows(const Relation& rel, const LiftSpec& spec, const SemiRing& sr) {
  std::vector<std::vector<double>> out(sr.arity(), std::vector<double>(rel.row_count()));
  const Column* y = spec.y_column.empty() ? nullptr : &rel.column(spec.y_column);
  std::vector<const Column*> ann_cols;
  for (const std::string& c : spec.ann_columns) ann_cols.push_back(&rel.column(c));
  const Column* w = spec.weight_column.empty() ? nullptr : &rel.column(spec.weight_column);
  AnnotationValue one = sr.one();
  for (size_t r = 0; r < rel.row_count(); ++r) {
    AnnotationValue v = one;
    if (y != nullptr) {
      check(y->is_valid(r), "target column has a null value");
      if (sr.kind() == SemiRingKind::class_count) {
        v = sr.lift_class(y->codes[r]);
      } else {
        double val = y->kind == ColumnKind::numeric ? y->num[r] : static_cast<double>(y->codes[r]);
        v = sr.lift_target(val);
      }
    } else if (!ann_cols.empty()) {
      check(ann_cols.size() == sr.arity(), "annotation column count mismatch");
      for (size_t i = 0; i < sr.arity(); ++i) v[i] = ann_cols[i]->num[r];
    }
    if (w != nullptr) {
      double weight = w->is_valid(r) ? w->num[r] : 0.0;
      for (size_t i = 0; i < sr.arity(); ++i) v[i] *= weight;
    }
    for (size_t i = 0; i < sr.arity(); ++i) out[i][r] = v[i];
  }
  return out;
}

namespace {

struct AttrsByRelation {
  std::map<std::string, std::vector<FeatureRef>> per_rel;

  const std::vector<FeatureRef>& of(const std::string& rel) const {
    static const std::vector<FeatureRef> empty;
    auto it = per_rel.find(rel);
    return it == per_rel.end() ? empty : it->second;
  }
};

// Lifted copy of one relation carrying only join keys and (qualified)
// attribute columns.
AnnotatedRelation lift_slim(const Database& db, const std::string& rel_name, const SemiRing& sr,
                            const std::map<std::string, LiftSpec>& lifts,
                            const std::vector<FeatureRef>& attrs) {
  const Relation& rel = db.relation(rel_name);
  Relation slim(rel_name);
  slim.set_row_count(rel.row_count());
  std::vector<std::string> key_cols;
  for (int ei : db.graph.incident_edges(rel_name)) {
    for (const std::string& k : db.graph.edge(ei).keys) {
      if (std::find(key_cols.begin(), key_cols.end(), k) == key_cols.end()) key_cols.push_back(k);
    }
  }
  for (const std::string& k : key_cols) slim.add_column(rel.column(k));
  for (const FeatureRef& a : attrs) {
    Column col = rel.column(a.column);
    col.name = qualified_column_name(a);
    slim.add_column(std::move(col));
  }

  AnnotatedRelation out;
  out.base = std::move(slim);
  out.sr = sr;
  LiftSpec spec;
  auto it = lifts.find(rel_name);
  if (it != lifts.end()) spec = it->second;
  out.ann = lift_rows(rel, spec, sr);
  return out;
}

}  // namespace

AnnotatedRelation groupby_over_join(const Database& db, const std::vector<FeatureRef>& attrs,
                                    const SemiRing& sr, const std::map<std::string, LiftSpec>& lifts) {
  AttrsByRelation by_rel;
  for (const FeatureRef& a : attrs) by_rel.per_rel[a.relation].push_back(a);

  RootedTree tree = root_at(db.graph, db.graph.target_relation);

  // Bottom-up: aggregate to (parent keys + subtree attrs), join children in.
  std::function<AnnotatedRelation(const std::string&, const std::string&)> build =
      [&](const std::string& rel, const std::string& parent) -> AnnotatedRelation {
    AnnotatedRelation ar = lift_slim(db, rel, sr, lifts, by_rel.of(rel));

    std::vector<std::string> carry;  // qualified subtree attrs
    for (const FeatureRef& a : by_rel.of(rel)) carry.push_back(qualified_column_name(a));

    auto it = tree.children.find(rel);
    if (it != tree.children.end()) {
      for (const std::string& child : it->second) {
        AnnotatedRelation m = build(child, rel);
        int ei = tree.parent_edge.at(child);
        const JoinEdge& e = db.graph.edge(ei);
        JoinKind kind = e.join_outer ? JoinKind::left_outer : JoinKind::inner;
        ar = join_annotated(ar, m, e.keys, kind);
        for (const Column& c : m.base.columns()) {
          bool is_key = std::find(e.keys.begin(), e.keys.end(), c.name) != e.keys.end();
          if (!is_key) carry.push_back(c.name);
        }
      }
    }

    std::vector<std::string> group_cols;
    if (!parent.empty()) {
      int pei = tree.parent_edge.at(rel);
      for (const std::string& k : db.graph.edge(pei).keys) group_cols.push_back(k);
    }
    for (const std::string& c : carry) group_cols.push_back(c);
    return groupby_aggregate(ar, group_cols);
  };

  AnnotatedRelation root = build(tree.root, "");
  // The root group-by already reduced to subtree attrs == all attrs.
  std::vector<std::string> attr_cols;
  for (const FeatureRef& a : attrs) attr_cols.push_back(qualified_column_name(a));
  return groupby_aggregate(root, attr_cols);
}

AnnotatedRelation build_cuboid(const Database& db, const std::vector<FeatureRef>& features, int bins,
                               const SemiRing& sr, const std::map<std::string, LiftSpec>& lifts) {
  check(bins >= 1, "bins must be >= 1");

  // Private copies of the relations that own features, with binned columns
  // substituted in place of the originals.
  std::set<std::string> owners;
  for (const FeatureRef& f : features) owners.insert(f.relation);
  Database work = db.clone_with_private(owners);

  for (const FeatureRef& f : features) {
    Relation& rel = work.relation(f.relation);
    Column& col = rel.column_mut(f.column);
    if (col.kind == ColumnKind::categorical || col.kind == ColumnKind::key) {
      uint32_t distinct = 0;
      std::vector<char> seen;
      for (size_t r = 0; r < rel.row_count(); ++r) {
        if (!col.is_valid(r)) continue;
        if (col.codes[r] >= seen.size()) seen.resize(col.codes[r] + 1, 0);
        if (!seen[col.codes[r]]) {
          seen[col.codes[r]] = 1;
          ++distinct;
        }
      }
      check(static_cast<int>(distinct) <= bins,
            "bin overflow: categorical '" + f.qualified() + "' has " + std::to_string(distinct) +
                " values for " + std::to_string(bins) + " bins");
      continue;  // identity binning
    }
    double lo = 0, hi = 0;
    bool any = false;
    for (size_t r = 0; r < rel.row_count(); ++r) {
      if (!col.is_valid(r)) continue;
      double v = col.num[r];
      if (!any || v < lo) lo = any ? std::min(lo, v) : v;
      if (!any || v > hi) hi = any ? std::max(hi, v) : v;
      any = true;
    }
    if (!any || lo == hi) continue;  // constant or all-null: one bin
    double width = (hi - lo) / static_cast<double>(bins);
    auto bin_of = [&](double v) -> int {
      double pos = (v - lo) / width;
      int b = static_cast<int>(std::ceil(pos)) - 1;  // ties at edges go lower
      return std::clamp(b, 0, bins - 1);
    };
    std::vector<double> rep(static_cast<size_t>(bins), -std::numeric_limits<double>::infinity());
    for (size_t r = 0; r < rel.row_count(); ++r) {
      if (!col.is_valid(r)) continue;
      int b = bin_of(col.num[r]);
      rep[static_cast<size_t>(b)] = std::max(rep[static_cast<size_t>(b)], col.num[r]);
    }
    std::vector<double> binned(rel.row_count(), 0.0);
    for (size_t r = 0; r < rel.row_count(); ++r) {
      if (col.is_valid(r)) binned[r] = rep[static_cast<size_t>(bin_of(col.num[r]))];
    }
    rel.swap_column(f.column, std::move(binned), col.validity);
  }

  return groupby_over_join(work, features, sr, lifts);
}

Database materialize_join_flat(const Database& db) {
  // Carry features plus the target through a fold of pairwise joins.
  std::vector<FeatureRef> attrs = db.features;
  if (std::find(attrs.begin(), attrs.end(), db.target) == attrs.end()) attrs.push_back(db.target);
  AttrsByRelation by_rel;
  for (const FeatureRef& a : attrs) by_rel.per_rel[a.relation].push_back(a);

  RootedTree tree = root_at(db.graph, db.graph.target_relation);
  SemiRing sr = SemiRing::count_ring();

  std::function<AnnotatedRelation(const std::string&)> build =
      [&](const std::string& rel) -> AnnotatedRelation {
    AnnotatedRelation ar = lift_slim(db, rel, sr, {}, by_rel.of(rel));
    auto it = tree.children.find(rel);
    if (it != tree.children.end()) {
      for (const std::string& child : it->second) {
        AnnotatedRelation m = build(child);
        int ei = tree.parent_edge.at(child);
        const JoinEdge& e = db.graph.edge(ei);
        JoinKind kind = e.join_outer ? JoinKind::left_outer : JoinKind::inner;
        ar = join_annotated(ar, m, e.keys, kind);
      }
    }
    return ar;
  };

  AnnotatedRelation joined = build(tree.root);

  Relation flat("flat");
  flat.set_row_count(joined.base.row_count());
  for (const FeatureRef& a : attrs) flat.add_column(joined.base.column(qualified_column_name(a)));

  JoinGraph graph;
  graph.nodes = {"flat"};
  graph.target_relation = "flat";

  FeatureRef target{"flat", qualified_column_name(db.target)};
  std::vector<FeatureRef> feats;
  for (const FeatureRef& f : db.features) feats.push_back(FeatureRef{"flat", qualified_column_name(f)});
  return make_database({std::move(flat)}, std::move(graph), target, feats);
}

CuboidDataset cuboid_dataset(const AnnotatedRelation& cuboid, const std::vector<FeatureRef>& features) {
  CuboidDataset out;
  out.sr = cuboid.sr;

  Relation rel("cuboid");
  rel.set_row_count(cuboid.base.row_count());
  for (const Column& c : cuboid.base.columns()) rel.add_column(c);
  std::vector<std::string> ann_cols;
  for (size_t i = 0; i < cuboid.ann.size(); ++i) {
    Column c;
    c.name = "__ann_" + std::to_string(i);
    c.kind = ColumnKind::numeric;
    c.num = cuboid.ann[i];
    ann_cols.push_back(c.name);
    rel.add_column(std::move(c));
  }

  JoinGraph graph;
  graph.nodes = {"cuboid"};
  graph.target_relation = "cuboid";

  FeatureRef target{"cuboid", ann_cols.front()};
  std::vector<FeatureRef> feats;
  for (const FeatureRef& f : features) feats.push_back(FeatureRef{"cuboid", qualified_column_name(f)});

  out.db = make_database({std::move(rel)}, std::move(graph), target, feats);
  out.lifts["cuboid"] = LiftSpec{"", ann_cols, ""};
  for (size_t i = 0; i < feats.size(); ++i) {
    const Column& col = out.db.relation("cuboid").column(feats[i].column);
    FeatureInfo info;
    info.ref = feats[i];
    info.kind = col.kind;
    info.dict = col.dict;
    out.features.push_back(std::move(info));
  }
  return out;
}

}  // namespace factorboost
