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
#include "factorboost/synth.hpp"

#include <algorithm>

namespace factorboost {

Column make_numeric_column(const std::string& name, std::vector<double> values) {
  Column c;
  c.name = name;
  c.kind = ColumnKind::numeric;
  c.num = std::move(values);
  return c;
}

Column make_key_column(const std::string& name, std::vector<uint32_t> codes,
                       std::shared_ptr<Dictionary> dict) {
  Column c;
  c.name = name;
  c.kind = ColumnKind::key;
  c.codes = std::move(codes);
  c.dict = std::move(dict);
  return c;
}

Column make_categorical_column(const std::string& name, std::vector<uint32_t> codes,
                               std::shared_ptr<Dictionary> dict) {
  Column c;
  c.name = name;
  c.kind = ColumnKind::categorical;
  c.codes = std::move(codes);
  c.dict = std::move(dict);
  return c;
}

std::shared_ptr<Dictionary> dictionary_of_size(uint32_t n) {
  auto dict = std::make_shared<Dictionary>();
  for (uint32_t i = 0; i < n; ++i) dict->encode("v" + std::to_string(i));
  return dict;
}

namespace {

std::vector<uint32_t> random_codes(Rng& rng, size_t n, uint32_t space) {
  std::vector<uint32_t> out(n);
  for (size_t i = 0; i < n; ++i) out[i] = static_cast<uint32_t>(rng.below(space));
  return out;
}

void add_feature_columns(Rng& rng, Relation& rel, const std::string& rel_name, int count,
                         bool allow_nulls, std::vector<FeatureRef>* features) {
  for (int i = 0; i < count; ++i) {
    std::string name = "x" + std::to_string(features->size());
    bool categorical = rng.below(3) == 0;
    size_t rows = rel.row_count();
    if (categorical) {
      uint32_t cardinality = 2 + static_cast<uint32_t>(rng.below(4));
      rel.add_column(make_categorical_column(name, random_codes(rng, rows, cardinality),
                                             dictionary_of_size(cardinality)));
    } else {
      std::vector<double> values(rows);
      uint32_t grid = 3 + static_cast<uint32_t>(rng.below(6));
      for (double& v : values) v = static_cast<double>(rng.below(grid));
      rel.add_column(make_numeric_column(name, std::move(values)));
    }
    if (allow_nulls && rng.below(4) == 0) {
      Column& col = rel.column_mut(name);
      for (size_t r = 0; r < rel.row_count(); ++r) {
        if (rng.below(10) == 0) col.validity.set_invalid(r, rel.row_count());
      }
    }
    features->push_back(FeatureRef{rel_name, name});
  }
}

}  // namespace

Database random_snowflake(uint64_t seed, const SnowflakeOptions& options) {
  Rng rng(seed);
  int n_rel = rng.uniform_int(options.min_relations, options.max_relations);
  size_t fact_rows = 30 + rng.below(static_cast<uint64_t>(std::max(1, options.max_fact_rows - 30)));

  // Relation 0 is the fact; every other relation hangs under a random earlier
  // relation as its unique-keyed "1" side.
  std::vector<std::string> names{"F"};
  for (int i = 1; i < n_rel; ++i) names.push_back("D" + std::to_string(i));

  std::vector<Relation> rels;
  std::vector<size_t> rows_of(static_cast<size_t>(n_rel));
  rows_of[0] = fact_rows;
  for (int i = 1; i < n_rel; ++i) rows_of[static_cast<size_t>(i)] = 4 + rng.below(40);

  for (int i = 0; i < n_rel; ++i) {
    Relation r(names[static_cast<size_t>(i)]);
    r.set_row_count(rows_of[static_cast<size_t>(i)]);
    rels.push_back(std::move(r));
  }

  JoinGraph graph;
  graph.nodes = names;
  std::sort(graph.nodes.begin(), graph.nodes.end());

  for (int i = 1; i < n_rel; ++i) {
    int parent = static_cast<int>(rng.below(static_cast<uint64_t>(i)));
    std::string key_name = "k" + std::to_string(i);
    uint32_t key_space = static_cast<uint32_t>(rows_of[static_cast<size_t>(i)]);
    auto dict = dictionary_of_size(key_space);
    // The child holds each key exactly once (unique, complete).
    std::vector<uint32_t> child_codes(key_space);
    for (uint32_t c = 0; c < key_space; ++c) child_codes[c] = c;
    rels[static_cast<size_t>(i)].add_column(make_key_column(key_name, std::move(child_codes), dict));
    // The parent references random child keys.
    rels[static_cast<size_t>(parent)].add_column(make_key_column(
        key_name, random_codes(rng, rows_of[static_cast<size_t>(parent)], key_space), dict));
    JoinEdge e;
    e.rel_a = names[static_cast<size_t>(parent)];
    e.rel_b = names[static_cast<size_t>(i)];
    e.keys = {key_name};
    e.cardinality = EdgeCardinality::n_to_one;
    graph.edges.push_back(std::move(e));
  }

  int n_features = rng.uniform_int(options.min_features, options.max_features);
  std::vector<FeatureRef> features;
  for (int f = 0; f < n_features; ++f) {
    int owner = static_cast<int>(rng.below(static_cast<uint64_t>(n_rel)));
    add_feature_columns(rng, rels[static_cast<size_t>(owner)], names[static_cast<size_t>(owner)], 1,
                        options.allow_nulls, &features);
  }

  int target_rel = 0;
  if (options.target_on_dim_allowed && n_rel > 1 && rng.below(4) == 0) {
    target_rel = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(n_rel - 1)));
  }
  size_t target_rows = rows_of[static_cast<size_t>(target_rel)];
  if (options.categorical_target) {
    uint32_t k = static_cast<uint32_t>(options.num_classes);
    rels[static_cast<size_t>(target_rel)].add_column(
        make_categorical_column("y", random_codes(rng, target_rows, k), dictionary_of_size(k)));
  } else {
    std::vector<double> y(target_rows);
    for (double& v : y) v = static_cast<double>(rng.uniform_int(-8, 8));
    rels[static_cast<size_t>(target_rel)].add_column(make_numeric_column("y", std::move(y)));
  }

  graph.target_relation = names[static_cast<size_t>(target_rel)];
  graph.fact_relation = "F";
  return make_database(std::move(rels), std::move(graph),
                       FeatureRef{names[static_cast<size_t>(target_rel)], "y"}, features);
}

Database random_galaxy(uint64_t seed, int max_fact_rows) {
  Rng rng(seed);
  size_t f1_rows = 20 + rng.below(static_cast<uint64_t>(std::max(1, max_fact_rows - 20)));
  size_t f2_rows = 20 + rng.below(static_cast<uint64_t>(std::max(1, max_fact_rows - 20)));
  uint32_t dim_rows = 3 + static_cast<uint32_t>(rng.below(12));

  auto dict = dictionary_of_size(dim_rows);
  Relation dim("Dim");
  dim.set_row_count(dim_rows);
  {
    std::vector<uint32_t> codes(dim_rows);
    for (uint32_t i = 0; i < dim_rows; ++i) codes[i] = i;
    dim.add_column(make_key_column("kd", std::move(codes), dict));
    std::vector<double> xd(dim_rows);
    for (double& v : xd) v = static_cast<double>(rng.uniform_int(0, 5));
    dim.add_column(make_numeric_column("xd", std::move(xd)));
  }

  auto fact = [&](const std::string& name, size_t rows, bool with_target) {
    Relation f(name);
    f.set_row_count(rows);
    f.add_column(make_key_column("kd", random_codes(rng, rows, dim_rows), dict));
    std::vector<double> x(rows);
    for (double& v : x) v = static_cast<double>(rng.uniform_int(0, 5));
    f.add_column(make_numeric_column("x_" + name, std::move(x)));
    if (with_target) {
      std::vector<double> y(rows);
      for (double& v : y) v = static_cast<double>(rng.uniform_int(-8, 8));
      f.add_column(make_numeric_column("y", std::move(y)));
    }
    return f;
  };

  Relation f1 = fact("F1", f1_rows, true);
  Relation f2 = fact("F2", f2_rows, false);

  JoinGraph graph;
  graph.nodes = {"Dim", "F1", "F2"};
  JoinEdge e1{"F1", "Dim", {"kd"}, EdgeCardinality::n_to_one, false};
  JoinEdge e2{"F2", "Dim", {"kd"}, EdgeCardinality::n_to_one, false};
  graph.edges = {e1, e2};
  graph.target_relation = "F1";

  std::vector<FeatureRef> features{{"Dim", "xd"}, {"F1", "x_F1"}, {"F2", "x_F2"}};
  return make_database({std::move(f1), std::move(dim), std::move(f2)}, std::move(graph),
                       FeatureRef{"F1", "y"}, features);
}

Database star_expansion(size_t center_rows, size_t fanout, uint64_t seed) {
  Rng rng(seed);
  size_t distinct = center_rows / fanout;  // distinct key values per leaf
  check(distinct > 0, "fanout too large");

  auto build_leaf = [&](const std::string& name, const std::string& key,
                        const std::string& feature) {
    // Each distinct key appears `fanout` times.
    Relation leaf(name);
    size_t rows = distinct * fanout;
    leaf.set_row_count(rows);
    auto dict = dictionary_of_size(static_cast<uint32_t>(distinct));
    std::vector<uint32_t> codes(rows);
    for (size_t r = 0; r < rows; ++r) codes[r] = static_cast<uint32_t>(r % distinct);
    leaf.add_column(make_key_column(key, std::move(codes), dict));
    std::vector<double> x(rows);
    for (double& v : x) v = static_cast<double>(rng.below(10));
    leaf.add_column(make_numeric_column(feature, std::move(x)));
    return std::make_pair(std::move(leaf), dict);
  };

  auto [l1, dict1] = build_leaf("L1", "k1", "x1");
  auto [l2, dict2] = build_leaf("L2", "k2", "x2");

  Relation center("C");
  center.set_row_count(center_rows);
  center.add_column(make_key_column("k1", random_codes(rng, center_rows, static_cast<uint32_t>(distinct)), dict1));
  center.add_column(make_key_column("k2", random_codes(rng, center_rows, static_cast<uint32_t>(distinct)), dict2));
  std::vector<double> y(center_rows);
  for (double& v : y) v = static_cast<double>(rng.uniform_int(-8, 8));
  center.add_column(make_numeric_column("y", std::move(y)));

  JoinGraph graph;
  graph.nodes = {"C", "L1", "L2"};
  graph.edges = {JoinEdge{"C", "L1", {"k1"}, EdgeCardinality::n_to_n, false},
                 JoinEdge{"C", "L2", {"k2"}, EdgeCardinality::n_to_n, false}};
  graph.target_relation = "C";

  std::vector<FeatureRef> features{{"L1", "x1"}, {"L2", "x2"}};
  return make_database({std::move(center), std::move(l1), std::move(l2)}, std::move(graph),
                       FeatureRef{"C", "y"}, features);
}

Database bench_schema(size_t fact_rows, size_t dim_rows, int extra_columns, uint64_t seed) {
  Rng rng(seed);
  auto dict = dictionary_of_size(static_cast<uint32_t>(dim_rows));

  Relation dim("D");
  dim.set_row_count(dim_rows);
  {
    std::vector<uint32_t> codes(dim_rows);
    for (size_t i = 0; i < dim_rows; ++i) codes[i] = static_cast<uint32_t>(i);
    dim.add_column(make_key_column("d", std::move(codes), dict));
    std::vector<double> feat(dim_rows);
    for (size_t i = 0; i < dim_rows; ++i) feat[i] = static_cast<double>(i);
    dim.add_column(make_numeric_column("feat", std::move(feat)));
  }

  Relation fact("F");
  fact.set_row_count(fact_rows);
  fact.add_column(make_key_column("d", random_codes(rng, fact_rows, static_cast<uint32_t>(dim_rows)), dict));
  {
    std::vector<double> y(fact_rows);
    for (double& v : y) v = static_cast<double>(rng.uniform_int(-100, 100));
    fact.add_column(make_numeric_column("y", std::move(y)));
  }
  for (int i = 0; i < extra_columns; ++i) {
    std::vector<double> extra(fact_rows);
    for (double& v : extra) v = rng.uniform();
    fact.add_column(make_numeric_column("extra" + std::to_string(i), std::move(extra)));
  }

  JoinGraph graph;
  graph.nodes = {"D", "F"};
  graph.edges = {JoinEdge{"F", "D", {"d"}, EdgeCardinality::n_to_one, false}};
  graph.target_relation = "F";
  graph.fact_relation = "F";

  std::vector<FeatureRef> features{{"D", "feat"}};
  return make_database({std::move(fact), std::move(dim)}, std::move(graph), FeatureRef{"F", "y"},
                       features);
}

Database example_star() {
  auto dict1 = dictionary_of_size(2);
  auto dict2 = dictionary_of_size(2);

  Relation d1("D1");
  d1.set_row_count(2);
  d1.add_column(make_key_column("k1", {0, 1}, dict1));
  d1.add_column(make_numeric_column("c", {1, 2}));

  Relation d2("D2");
  d2.set_row_count(2);
  d2.add_column(make_key_column("k2", {0, 1}, dict2));
  d2.add_column(make_numeric_column("d", {1, 2}));

  Relation f("F");
  f.set_row_count(8);
  f.add_column(make_key_column("k1", {0, 0, 0, 0, 1, 1, 1, 1}, dict1));
  f.add_column(make_key_column("k2", {0, 0, 1, 1, 1, 1, 1, 1}, dict2));
  f.add_column(make_numeric_column("y", {2, 3, 1, 2, 1, 2, 2, 3}));

  JoinGraph graph;
  graph.nodes = {"D1", "D2", "F"};
  graph.edges = {JoinEdge{"F", "D1", {"k1"}, EdgeCardinality::n_to_one, false},
                 JoinEdge{"F", "D2", {"k2"}, EdgeCardinality::n_to_one, false}};
  graph.target_relation = "F";
  graph.fact_relation = "F";

  std::vector<FeatureRef> features{{"D1", "c"}, {"D2", "d"}};
  return make_database({std::move(f), std::move(d1), std::move(d2)}, std::move(graph),
                       FeatureRef{"F", "y"}, features);
}

Database example_chain() {
  auto dict_b = dictionary_of_size(3);
  auto dict_c = dictionary_of_size(3);

  Relation r("R");
  r.set_row_count(4);
  r.add_column(make_key_column("b", {0, 0, 1, 2}, dict_b));
  r.add_column(make_numeric_column("y", {1, 3, 2, 4}));

  Relation s("S");
  s.set_row_count(4);
  s.add_column(make_key_column("b", {0, 1, 1, 2}, dict_b));
  s.add_column(make_key_column("c", {0, 0, 1, 2}, dict_c));

  Relation t("T");
  t.set_row_count(3);
  t.add_column(make_key_column("c", {0, 1, 2}, dict_c));
  t.add_column(make_numeric_column("d", {1, 2, 3}));

  JoinGraph graph;
  graph.nodes = {"R", "S", "T"};
  graph.edges = {JoinEdge{"S", "R", {"b"}, EdgeCardinality::n_to_n, false},
                 JoinEdge{"S", "T", {"c"}, EdgeCardinality::n_to_one, false}};
  graph.target_relation = "R";

  std::vector<FeatureRef> features{{"T", "d"}};
  return make_database({std::move(r), std::move(s), std::move(t)}, std::move(graph),
                       FeatureRef{"R", "y"}, features);
}

}  // namespace factorboost
