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
#include <set>
#include <string>
#include <vector>

#include "factorboost/common.hpp"

namespace factorboost {

// Cardinality of rel_a : rel_b. n_to_one means rel_a is the N side (many
// rel_a rows map to one rel_b row).
enum class EdgeCardinality { n_to_one, one_to_n, n_to_n };

struct JoinEdge {
  std::string rel_a;
  std::string rel_b;
  std::vector<std::string> keys;
  EdgeCardinality cardinality = EdgeCardinality::n_to_n;
  // Join as left outer during message passing (missing join keys keep the
  // receiver row with its annotation unchanged). Default is inner.
  bool join_outer = false;

  const std::string& other(const std::string& rel) const { return rel == rel_a ? rel_b : rel_a; }
  bool touches(const std::string& rel) const { return rel == rel_a || rel == rel_b; }

  // True when `one_side` is the "1" end of this edge.
  bool is_one_side(const std::string& one_side) const {
    if (cardinality == EdgeCardinality::n_to_one) return one_side == rel_b;
    if (cardinality == EdgeCardinality::one_to_n) return one_side == rel_a;
    return false;
  }
};

// A directed use of an undirected edge: the message direction from -> to.
struct DirectedEdge {
  int edge_index = -1;
  std::string from;
  std::string to;

  bool operator<(const DirectedEdge& o) const {
    if (edge_index != o.edge_index) return edge_index < o.edge_index;
    return from < o.from;
  }
  bool operator==(const DirectedEdge& o) const { return edge_index == o.edge_index && from == o.from; }
};

struct JoinGraph {
  std::vector<std::string> nodes;  // sorted unique relation names
  std::vector<JoinEdge> edges;
  std::string target_relation;
  std::string fact_relation;  // optional hint; empty when unset

  bool has_node(const std::string& name) const;
  std::vector<int> incident_edges(const std::string& rel) const;
  const JoinEdge& edge(int idx) const { return edges[static_cast<size_t>(idx)]; }
};

// Spanning tree with all edges directed toward the root. Children are kept in
// lexicographic order so traversals are deterministic.
struct RootedTree {
  std::string root;
  std::map<std::string, std::string> parent;              // node -> parent (root absent)
  std::map<std::string, std::vector<std::string>> children;
  std::map<std::string, int> parent_edge;                 // node -> edge index to parent

  // Relations in the subtree rooted at `rel` (inclusive).
  std::set<std::string> subtree(const std::string& rel) const;
  // Leaf-to-root order (children before parents).
  std::vector<std::string> bottom_up() const;
};

struct Cluster {
  std::string fact;
  std::set<std::string> members;
};

// Checks connectivity and acyclicity; reports one concrete cycle or the
// disconnected components on failure. Key typing against actual relations is
// re-checked at dataset load.
void validate(const JoinGraph& graph);

// BFS orientation toward `root` with lexicographic child order.
RootedTree root_at(const JoinGraph& graph, const std::string& root);

// Maximal clusters: for each candidate fact F, the set of relations reachable
// from F by traversing edges from their N side to their 1 side. Clusters
// contained in another cluster are dropped; every relation lands in at least
// one cluster (worst case its own singleton).
std::vector<Cluster> compute_clusters(const JoinGraph& graph);

// depends_on of a message from -> to: relations on the `from` side once the
// edge is removed. This is independent of which root the tree was built for.
std::set<std::string> sender_side(const JoinGraph& graph, const DirectedEdge& edge);

// Directed edges whose messages are identity: the sender subtree carries no
// annotations (no relation from `annotated_relations`), and every hop flows
// 1-to-N with complete, unique keys so receiver annotations are unchanged.
// `edge_complete` maps edge index -> "every N-side row matches exactly one
// 1-side row" (computed at load).
std::set<DirectedEdge> identity_paths(const JoinGraph& graph, const RootedTree& tree,
                                      const std::set<std::string>& annotated_relations,
                                      const std::map<int, bool>& edge_complete);

// True when one relation reaches every other along N-to-1 edges (fact side N).
bool is_snowflake(const JoinGraph& graph, std::string* fact_out = nullptr);

}  // namespace factorboost
