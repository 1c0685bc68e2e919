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

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "factorboost/csv.hpp"
#include "factorboost/join_graph.hpp"
#include "factorboost/relation.hpp"

namespace factorboost {

struct FeatureRef {
  std::string relation;
  std::string column;

  std::string qualified() const { return relation + "." + column; }
  bool operator==(const FeatureRef& o) const { return relation == o.relation && column == o.column; }
};

struct RelationConfig {
  std::string name;
  std::string path;  // CSV file
  std::vector<ColumnSpec> columns;
};

struct DatasetConfig {
  std::vector<RelationConfig> relations;
  std::vector<JoinEdge> joins;
  FeatureRef target;
  std::vector<FeatureRef> features;
  std::string fact_relation;  // optional
};

DatasetConfig parse_dataset_config(const std::string& json_text, const std::string& base_dir = "");
DatasetConfig load_dataset_config(const std::string& path);

// Precomputed join machinery for one edge: every row of each side gets a
// dense joint code over the edge's key tuple (shared code space across both
// sides), so joins and message lookups reduce to array indexing.
struct EdgeInfo {
  std::vector<uint32_t> codes_a;  // per rel_a row; kNullKey when any key part is null
  std::vector<uint32_t> codes_b;
  uint32_t code_space = 0;
  bool unique_a = false;  // each code appears at most once on the side
  bool unique_b = false;
  bool complete = false;  // every N-side row matches exactly one 1-side row
  std::vector<int32_t> row_of_code_a;  // code -> row index (unique sides only)
  std::vector<int32_t> row_of_code_b;
  std::vector<char> present_a;  // code observed on the side at all (pre-predicate)
  std::vector<char> present_b;

  static constexpr uint32_t kNullKey = UINT32_MAX;

  const std::vector<uint32_t>& codes_of(const JoinEdge& e, const std::string& rel) const {
    return rel == e.rel_a ? codes_a : codes_b;
  }
  const std::vector<char>& present_of(const JoinEdge& e, const std::string& rel) const {
    return rel == e.rel_a ? present_a : present_b;
  }
  bool unique_of(const JoinEdge& e, const std::string& rel) const {
    return rel == e.rel_a ? unique_a : unique_b;
  }
};

// Relations + join graph + edge machinery. Relations are append-only after
// load except for column swaps, which the training scheduler serializes.
class Database {
 public:
  JoinGraph graph;
  std::vector<EdgeInfo> edge_info;  // parallel to graph.edges
  FeatureRef target;
  std::vector<FeatureRef> features;

  Relation& relation(const std::string& name);
  const Relation& relation(const std::string& name) const;
  std::shared_ptr<Relation> relation_ptr(const std::string& name);
  bool has_relation(const std::string& name) const { return relations_.count(name) > 0; }
  void add_relation(Relation rel);

  // Recomputes edge codes and flags (called after load, or by tests that
  // mutate key columns).
  void build_edge_info();

  // Cardinality verification: the declared "1" side of each edge must have
  // unique key tuples. Hard error otherwise.
  void verify_cardinalities() const;

  // Every join key exists with kind=key on both sides; features and target
  // exist with usable kinds.
  void validate_schema() const;

  std::map<int, bool> edge_complete_flags() const;

  const std::vector<std::string>& relation_names() const { return names_; }

  // Copy of the database sharing relation storage, except the named
  // relations which are deep-copied. Training uses this so annotation
  // columns and swaps never touch user data.
  Database clone_with_private(const std::set<std::string>& private_relations) const;

 private:
  std::map<std::string, std::shared_ptr<Relation>> relations_;
  std::vector<std::string> names_;  // insertion order
};

// Loads all CSVs, dictionary-encodes keys (one shared dictionary per key
// column name) and categoricals (one per relation.column), verifies declared
// cardinalities, and builds the edge machinery.
Database load_dataset(const DatasetConfig& config);

// Assembles a Database from in-memory relations (tests and generators).
Database make_database(std::vector<Relation> relations, JoinGraph graph, FeatureRef target,
                       std::vector<FeatureRef> features);

}  // namespace factorboost
