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
#include "factorboost/join_graph.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace factorboost {

bool JoinGraph::has_node(const std::string& name) const {
  return std::find(nodes.begin(), nodes.end(), name) != nodes.end();
}

std::vector<int> JoinGraph::incident_edges(const std::string& rel) const {
  std::vector<int> out;
  for (size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].touches(rel)) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::set<std::string> RootedTree::subtree(const std::string& rel) const {
  std::set<std::string> out;
  std::deque<std::string> queue{rel};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    out.insert(cur);
    auto it = children.find(cur);
    if (it == children.end()) continue;
    for (const std::string& ch : it->second) queue.push_back(ch);
  }
  return out;
}

std::vector<std::string> RootedTree::bottom_up() const {
  std::vector<std::string> order;
  std::function<void(const std::string&)> visit = [&](const std::string& rel) {
    auto it = children.find(rel);
    if (it != children.end()) {
      for (const std::string& ch : it->second) visit(ch);
    }
    order.push_back(rel);
  };
  visit(root);
  return order;
}

void validate(const JoinGraph& graph) {
  check(!graph.nodes.empty(), "join graph has no relations");
  for (const JoinEdge& e : graph.edges) {
    check(graph.has_node(e.rel_a) && graph.has_node(e.rel_b),
          "join edge references unknown relation '" + (graph.has_node(e.rel_a) ? e.rel_b : e.rel_a) + "'");
    check(e.rel_a != e.rel_b, "self-join edge on '" + e.rel_a + "' is not supported");
    check(!e.keys.empty(), "join edge " + e.rel_a + "-" + e.rel_b + " declares no keys");
  }

  // Cycle check with an explicit path so the error can name one cycle.
  std::map<std::string, std::pair<std::string, int>> visited_from;  // node -> (parent, via edge)
  std::set<std::string> visited;
  auto ancestors_of = [&](std::string node) {
    std::vector<std::string> path{node};
    while (!visited_from.at(node).first.empty()) {
      node = visited_from.at(node).first;
      path.push_back(node);
    }
    return path;
  };
  const std::string& start = graph.nodes.front();
  std::deque<std::string> queue{start};
  visited.insert(start);
  visited_from[start] = {"", -1};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (int ei : graph.incident_edges(cur)) {
      if (ei == visited_from[cur].second) continue;  // edge we arrived through
      const std::string& nxt = graph.edge(ei).other(cur);
      if (visited.count(nxt)) {
        // Join the two ancestor chains at their lowest common relation.
        std::vector<std::string> a = ancestors_of(cur);
        std::vector<std::string> b = ancestors_of(nxt);
        std::set<std::string> b_set(b.begin(), b.end());
        std::vector<std::string> cyc;
        std::string lca;
        for (const std::string& n : a) {
          cyc.push_back(n);
          if (b_set.count(n)) {
            lca = n;
            break;
          }
        }
        std::vector<std::string> down;
        for (const std::string& n : b) {
          if (n == lca) break;
          down.push_back(n);
        }
        for (auto it = down.rbegin(); it != down.rend(); ++it) cyc.push_back(*it);
        std::string msg;
        for (const std::string& n : cyc) msg += n + "-";
        msg += cur;
        fail("join graph has a cycle: " + msg);
      }
      visited.insert(nxt);
      visited_from[nxt] = {cur, ei};
      queue.push_back(nxt);
    }
  }
  if (visited.size() != graph.nodes.size()) {
    std::string missing;
    for (const std::string& n : graph.nodes) {
      if (!visited.count(n)) missing += (missing.empty() ? "" : ", ") + n;
    }
    fail("join graph is disconnected; unreachable relations: " + missing);
  }
}

RootedTree root_at(const JoinGraph& graph, const std::string& root) {
  check(graph.has_node(root), "unknown root relation '" + root + "'");
  RootedTree tree;
  tree.root = root;
  std::set<std::string> seen{root};
  std::deque<std::string> queue{root};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    std::vector<std::pair<std::string, int>> next;
    for (int ei : graph.incident_edges(cur)) {
      const std::string& other = graph.edge(ei).other(cur);
      if (seen.count(other)) continue;
      next.emplace_back(other, ei);
    }
    std::sort(next.begin(), next.end());
    for (auto& [child, ei] : next) {
      seen.insert(child);
      tree.parent[child] = cur;
      tree.parent_edge[child] = ei;
      tree.children[cur].push_back(child);
      queue.push_back(child);
    }
  }
  return tree;
}

namespace {

// Relations reachable from `fact` by repeatedly crossing an edge from its N
// side to its 1 side.
std::set<std::string> n_to_one_closure(const JoinGraph& graph, const std::string& fact) {
  std::set<std::string> members{fact};
  std::deque<std::string> queue{fact};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (int ei : graph.incident_edges(cur)) {
      const JoinEdge& e = graph.edge(ei);
      const std::string& other = e.other(cur);
      if (members.count(other)) continue;
      if (e.is_one_side(other)) {  // cur is the N side, other the 1 side
        members.insert(other);
        queue.push_back(other);
      }
    }
  }
  return members;
}

}  // namespace

std::vector<Cluster> compute_clusters(const JoinGraph& graph) {
  std::vector<Cluster> all;
  for (const std::string& rel : graph.nodes) {
    all.push_back(Cluster{rel, n_to_one_closure(graph, rel)});
  }
  // Keep maximal clusters only.
  std::vector<Cluster> maximal;
  for (const Cluster& c : all) {
    bool contained = false;
    for (const Cluster& o : all) {
      if (o.fact == c.fact) continue;
      if (std::includes(o.members.begin(), o.members.end(), c.members.begin(), c.members.end()) &&
          o.members.size() > c.members.size()) {
        contained = true;
        break;
      }
    }
    if (!contained) maximal.push_back(c);
  }
  std::sort(maximal.begin(), maximal.end(), [](const Cluster& a, const Cluster& b) { return a.fact < b.fact; });
  return maximal;
}

std::set<std::string> sender_side(const JoinGraph& graph, const DirectedEdge& edge) {
  std::set<std::string> out{edge.from};
  std::deque<std::string> queue{edge.from};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (int ei : graph.incident_edges(cur)) {
      if (ei == edge.edge_index && cur == edge.from) continue;
      const std::string& other = graph.edge(ei).other(cur);
      if (out.count(other)) continue;
      out.insert(other);
      queue.push_back(other);
    }
  }
  return out;
}

std::set<DirectedEdge> identity_paths(const JoinGraph& graph, const RootedTree& tree,
                                      const std::set<std::string>& annotated_relations,
                                      const std::map<int, bool>& edge_complete) {
  std::set<DirectedEdge> identity;
  for (const std::string& rel : tree.bottom_up()) {
    if (rel == tree.root) continue;
    const std::string& parent = tree.parent.at(rel);
    int ei = tree.parent_edge.at(rel);
    if (annotated_relations.count(rel)) continue;
    // Every child message must itself be identity.
    bool children_ok = true;
    auto it = tree.children.find(rel);
    if (it != tree.children.end()) {
      for (const std::string& ch : it->second) {
        if (!identity.count(DirectedEdge{tree.parent_edge.at(ch), ch, rel})) {
          children_ok = false;
          break;
        }
      }
    }
    if (!children_ok) continue;
    // The sender must be the 1 side of the edge with complete keys, so each
    // receiver row joins exactly one sender row.
    const JoinEdge& e = graph.edge(ei);
    if (!e.is_one_side(rel)) continue;
    auto flag = edge_complete.find(ei);
    if (flag == edge_complete.end() || !flag->second) continue;
    identity.insert(DirectedEdge{ei, rel, parent});
  }
  return identity;
}

bool is_snowflake(const JoinGraph& graph, std::string* fact_out) {
  for (const Cluster& c : compute_clusters(graph)) {
    if (c.members.size() == graph.nodes.size()) {
      if (fact_out) *fact_out = c.fact;
      return true;
    }
  }
  return false;
}

}  // namespace factorboost
