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
#include "factorboost/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace factorboost {

namespace {

ColumnKind parse_kind(const std::string& s) {
  if (s == "numeric") return ColumnKind::numeric;
  if (s == "categorical") return ColumnKind::categorical;
  if (s == "key") return ColumnKind::key;
  fail("unknown column kind '" + s + "' (expected numeric, categorical, or key)");
}

EdgeCardinality parse_cardinality(const std::string& s) {
  if (s == "N:1") return EdgeCardinality::n_to_one;
  if (s == "1:N") return EdgeCardinality::one_to_n;
  if (s == "N:N") return EdgeCardinality::n_to_n;
  fail("unknown cardinality '" + s + "' (expected N:1, 1:N, or N:N)");
}

FeatureRef parse_feature_ref(const std::string& s) {
  auto dot = s.find('.');
  check(dot != std::string::npos && dot > 0 && dot + 1 < s.size(),
        "feature reference '" + s + "' must be relation.column");
  return FeatureRef{s.substr(0, dot), s.substr(dot + 1)};
}

}  // namespace

DatasetConfig parse_dataset_config(const std::string& json_text, const std::string& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const std::exception& e) {
    fail(std::string("dataset config is not valid JSON: ") + e.what());
  }
  DatasetConfig cfg;
  check(j.contains("relations") && j["relations"].is_array(), "config needs a 'relations' array");
  for (const auto& r : j["relations"]) {
    RelationConfig rc;
    rc.name = r.at("name").get<std::string>();
    rc.path = r.at("path").get<std::string>();
    if (!base_dir.empty() && !rc.path.empty() && rc.path[0] != '/') {
      rc.path = base_dir + "/" + rc.path;
    }
    for (const auto& c : r.at("columns")) {
      ColumnSpec spec;
      spec.name = c.at("name").get<std::string>();
      spec.kind = parse_kind(c.at("kind").get<std::string>());
      spec.nullable = c.value("nullable", false);
      rc.columns.push_back(std::move(spec));
    }
    cfg.relations.push_back(std::move(rc));
  }
  check(j.contains("joins") && j["joins"].is_array(), "config needs a 'joins' array");
  for (const auto& e : j["joins"]) {
    JoinEdge edge;
    edge.rel_a = e.at("left").get<std::string>();
    edge.rel_b = e.at("right").get<std::string>();
    for (const auto& k : e.at("keys")) edge.keys.push_back(k.get<std::string>());
    edge.cardinality = parse_cardinality(e.value("cardinality", std::string("N:N")));
    std::string jt = e.value("join_type", std::string("inner"));
    check(jt == "inner" || jt == "left_outer", "join_type must be inner or left_outer");
    edge.join_outer = jt == "left_outer";
    cfg.joins.push_back(std::move(edge));
  }
  check(j.contains("target"), "config needs a 'target'");
  cfg.target.relation = j["target"].at("relation").get<std::string>();
  cfg.target.column = j["target"].at("column").get<std::string>();
  check(j.contains("features") && j["features"].is_array(), "config needs a 'features' array");
  for (const auto& f : j["features"]) cfg.features.push_back(parse_feature_ref(f.get<std::string>()));
  cfg.fact_relation = j.value("fact_relation", std::string());
  return cfg;
}

DatasetConfig load_dataset_config(const std::string& path) {
  std::ifstream in(path);
  check(in.good(), "cannot open dataset config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string dir;
  auto slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash);
  return parse_dataset_config(ss.str(), dir);
}

Relation& Database::relation(const std::string& name) {
  auto it = relations_.find(name);
  if (it == relations_.end()) fail("unknown relation '" + name + "'");
  return *it->second;
}

const Relation& Database::relation(const std::string& name) const {
  auto it = relations_.find(name);
  if (it == relations_.end()) fail("unknown relation '" + name + "'");
  return *it->second;
}

std::shared_ptr<Relation> Database::relation_ptr(const std::string& name) {
  auto it = relations_.find(name);
  if (it == relations_.end()) fail("unknown relation '" + name + "'");
  return it->second;
}

void Database::add_relation(Relation rel) {
  std::string name = rel.name();
  check(!name.empty(), "relation must be named");
  check(relations_.find(name) == relations_.end(), "duplicate relation '" + name + "'");
  relations_.emplace(name, std::make_shared<Relation>(std::move(rel)));
  names_.push_back(name);
}

void Database::validate_schema() const {
  for (const JoinEdge& e : graph.edges) {
    for (const std::string& k : e.keys) {
      for (const std::string* rel : {&e.rel_a, &e.rel_b}) {
        const Relation& r = relation(*rel);
        check(r.has_column(k), "join key '" + k + "' missing from relation '" + *rel + "'");
        check(r.column(k).kind == ColumnKind::key,
              "join key '" + *rel + "." + k + "' must have kind=key, found " +
                  column_kind_name(r.column(k).kind));
      }
    }
  }
  const Relation& trel = relation(target.relation);
  check(trel.has_column(target.column), "target column '" + target.qualified() + "' does not exist");
  for (const FeatureRef& f : features) {
    const Relation& r = relation(f.relation);
    check(r.has_column(f.column), "feature '" + f.qualified() + "' does not exist");
    ColumnKind kind = r.column(f.column).kind;
    check(kind == ColumnKind::numeric || kind == ColumnKind::categorical,
          "feature '" + f.qualified() + "' must be numeric or categorical");
    check(!(f == target), "features must exclude the target");
  }
}

void Database::build_edge_info() {
  edge_info.assign(graph.edges.size(), EdgeInfo{});
  for (size_t ei = 0; ei < graph.edges.size(); ++ei) {
    const JoinEdge& e = graph.edges[ei];
    EdgeInfo& info = edge_info[ei];
    const Relation& ra = relation(e.rel_a);
    const Relation& rb = relation(e.rel_b);

    // Joint dense code over observed key tuples of both sides.
    std::unordered_map<uint64_t, std::vector<std::pair<std::vector<uint32_t>, uint32_t>>> joint;
    uint32_t next_code = 0;
    auto encode_rows = [&](const Relation& r, std::vector<uint32_t>* out) {
      std::vector<const Column*> key_cols;
      for (const std::string& k : e.keys) key_cols.push_back(&r.column(k));
      out->resize(r.row_count());
      std::vector<uint32_t> tuple(e.keys.size());
      for (size_t row = 0; row < r.row_count(); ++row) {
        bool valid = true;
        for (size_t i = 0; i < key_cols.size(); ++i) {
          if (!key_cols[i]->is_valid(row)) {
            valid = false;
            break;
          }
          tuple[i] = key_cols[i]->codes[row];
        }
        if (!valid) {
          (*out)[row] = EdgeInfo::kNullKey;
          continue;
        }
        uint64_t h = fnv1a64(tuple.data(), tuple.size() * sizeof(uint32_t));
        auto& bucket = joint[h];
        uint32_t code = EdgeInfo::kNullKey;
        for (auto& [t, c] : bucket) {
          if (t == tuple) {
            code = c;
            break;
          }
        }
        if (code == EdgeInfo::kNullKey) {
          code = next_code++;
          bucket.emplace_back(tuple, code);
        }
        (*out)[row] = code;
      }
    };
    encode_rows(ra, &info.codes_a);
    encode_rows(rb, &info.codes_b);
    info.code_space = next_code;

    // Uniqueness is over non-null key tuples; rows with a null key component
    // are unmatchable and do not break it.
    auto index_side = [&](const std::vector<uint32_t>& codes, std::vector<int32_t>* row_of, bool* unique) {
      row_of->assign(info.code_space, -1);
      *unique = true;
      for (size_t row = 0; row < codes.size(); ++row) {
        uint32_t c = codes[row];
        if (c == EdgeInfo::kNullKey) continue;
        if ((*row_of)[c] >= 0) {
          *unique = false;
        } else {
          (*row_of)[c] = static_cast<int32_t>(row);
        }
      }
      if (!*unique) row_of->clear();
    };
    index_side(info.codes_a, &info.row_of_code_a, &info.unique_a);
    index_side(info.codes_b, &info.row_of_code_b, &info.unique_b);

    auto presence = [&](const std::vector<uint32_t>& codes, std::vector<char>* present) {
      present->assign(info.code_space, 0);
      for (uint32_t c : codes) {
        if (c != EdgeInfo::kNullKey) (*present)[c] = 1;
      }
    };
    presence(info.codes_a, &info.present_a);
    presence(info.codes_b, &info.present_b);

    // complete: every N-side row has a non-null key that matches exactly one
    // 1-side row. Only meaningful for declared N:1 edges (either direction).
    info.complete = false;
    if (e.cardinality != EdgeCardinality::n_to_n) {
      const bool one_is_b = e.cardinality == EdgeCardinality::n_to_one;
      const std::vector<uint32_t>& n_codes = one_is_b ? info.codes_a : info.codes_b;
      const std::vector<uint32_t>& one_codes = one_is_b ? info.codes_b : info.codes_a;
      bool one_unique = one_is_b ? info.unique_b : info.unique_a;
      if (one_unique) {
        std::vector<char> present(info.code_space, 0);
        for (uint32_t c : one_codes) {
          if (c != EdgeInfo::kNullKey) present[c] = 1;
        }
        info.complete = true;
        for (uint32_t c : n_codes) {
          if (c == EdgeInfo::kNullKey || !present[c]) {
            info.complete = false;
            break;
          }
        }
      }
    }
  }
}

void Database::verify_cardinalities() const {
  for (size_t ei = 0; ei < graph.edges.size(); ++ei) {
    const JoinEdge& e = graph.edges[ei];
    const EdgeInfo& info = edge_info[ei];
    if (e.cardinality == EdgeCardinality::n_to_one) {
      check(info.unique_b, "edge " + e.rel_a + "-" + e.rel_b +
                               " is declared N:1 but '" + e.rel_b + "' has duplicate or null key tuples");
    } else if (e.cardinality == EdgeCardinality::one_to_n) {
      check(info.unique_a, "edge " + e.rel_a + "-" + e.rel_b +
                               " is declared 1:N but '" + e.rel_a + "' has duplicate or null key tuples");
    }
  }
}

std::map<int, bool> Database::edge_complete_flags() const {
  std::map<int, bool> flags;
  for (size_t ei = 0; ei < edge_info.size(); ++ei) flags[static_cast<int>(ei)] = edge_info[ei].complete;
  return flags;
}

Database Database::clone_with_private(const std::set<std::string>& private_relations) const {
  Database out;
  out.graph = graph;
  out.edge_info = edge_info;
  out.target = target;
  out.features = features;
  out.names_ = names_;
  for (const auto& [name, rel] : relations_) {
    if (private_relations.count(name)) {
      out.relations_.emplace(name, std::make_shared<Relation>(*rel));
    } else {
      out.relations_.emplace(name, rel);
    }
  }
  return out;
}

Database load_dataset(const DatasetConfig& config) {
  Database db;
  // One shared dictionary per key column name so codes agree across relations.
  std::map<std::string, std::shared_ptr<Dictionary>> key_dicts;
  for (const JoinEdge& e : config.joins) {
    for (const std::string& k : e.keys) {
      if (!key_dicts.count(k)) key_dicts[k] = std::make_shared<Dictionary>();
    }
  }
  for (const RelationConfig& rc : config.relations) {
    std::vector<ColumnSpec> schema = rc.columns;
    for (ColumnSpec& spec : schema) {
      if (spec.kind == ColumnKind::key) {
        auto it = key_dicts.find(spec.name);
        spec.dict = it != key_dicts.end() ? it->second : std::make_shared<Dictionary>();
      }
    }
    db.add_relation(load_csv(rc.path, rc.name, schema));
    db.graph.nodes.push_back(rc.name);
  }
  std::sort(db.graph.nodes.begin(), db.graph.nodes.end());
  db.graph.edges = config.joins;
  db.graph.target_relation = config.target.relation;
  db.graph.fact_relation = config.fact_relation;
  db.target = config.target;
  db.features = config.features;

  validate(db.graph);
  db.validate_schema();
  db.build_edge_info();
  db.verify_cardinalities();
  return db;
}

Database make_database(std::vector<Relation> relations, JoinGraph graph, FeatureRef target,
                       std::vector<FeatureRef> features) {
  Database db;
  for (Relation& r : relations) db.add_relation(std::move(r));
  db.graph = std::move(graph);
  db.graph.nodes.clear();
  for (const std::string& n : db.relation_names()) db.graph.nodes.push_back(n);
  std::sort(db.graph.nodes.begin(), db.graph.nodes.end());
  if (db.graph.target_relation.empty()) db.graph.target_relation = target.relation;
  db.target = std::move(target);
  db.features = std::move(features);
  validate(db.graph);
  db.validate_schema();
  db.build_edge_info();
  db.verify_cardinalities();
  return db;
}

}  // namespace factorboost
