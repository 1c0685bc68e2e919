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

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <unordered_map>

#include "factorboost/annotated.hpp"
#include "factorboost/dataset.hpp"
#include "factorboost/predicates.hpp"

namespace factorboost {

// How a relation's rows are annotated during a run: lift of a target column,
// explicit annotation columns (one per semi-ring component), or the identity
// lift. A weight column scales all components (bag semantics).
struct LiftSpec {
  std::string y_column;                  // lift the target value / class
  std::vector<std::string> ann_columns;  // pre-annotated components
  std::string weight_column;

  bool is_identity() const {
    return y_column.empty() && ann_columns.empty() && weight_column.empty();
  }

  uint64_t digest() const {
    uint64_t h = 0x51f15;
    h = hash_combine(h, hash_str(y_column));
    for (const std::string& c : ann_columns) h = hash_combine(h, hash_str(c));
    h = hash_combine(h, hash_str(weight_column));
    return h;
  }
};

enum class MessageKind { identity, semijoin, full };

// An aggregated annotation table flowing along a directed join edge, keyed by
// the edge's joint key code.
struct Message {
  DirectedEdge edge;
  MessageKind kind = MessageKind::full;
  std::set<std::string> depends_on;  // sender-side relations
  uint64_t fingerprint = 0;

  // full payload: code -> slot plus one column per semi-ring component
  std::vector<int32_t> slot_of_code;
  std::vector<uint32_t> keys;             // slot -> code
  std::vector<std::vector<double>> ann;   // [component][slot]

  // semijoin payload: key membership only (annotations provably all-one)
  std::vector<char> member;

  size_t payload_rows() const {
    if (kind == MessageKind::full) return keys.size();
    if (kind == MessageKind::semijoin) {
      size_t n = 0;
      for (char m : member) n += m != 0;
      return n;
    }
    return 0;
  }
};

struct CacheStats {
  std::atomic<uint64_t> computed{0};
  std::atomic<uint64_t> reused{0};
};

// Keyed by (directed edge, predicate fingerprint). Concurrent readers are
// fine; racing writers deduplicate first-writer-wins (results are identical
// by purity).
class MessageCache {
 public:
  struct Key {
    int edge_index;
    bool from_a;  // direction: true = rel_a -> rel_b
    uint64_t fingerprint;
    bool operator<(const Key& o) const {
      if (edge_index != o.edge_index) return edge_index < o.edge_index;
      if (from_a != o.from_a) return from_a < o.from_a;
      return fingerprint < o.fingerprint;
    }
  };

  std::shared_ptr<const Message> get(const Key& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    stats_.reused.fetch_add(1, std::memory_order_relaxed);
    return it->second;
  }

  std::shared_ptr<const Message> put(const Key& key, std::shared_ptr<const Message> msg) {
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = entries_.emplace(key, std::move(msg));
    if (inserted) stats_.computed.fetch_add(1, std::memory_order_relaxed);
    return it->second;  // first writer wins
  }

  // Drops every entry whose key is not in `live`.
  void retain(const std::set<Key>& live) {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto it = entries_.begin(); it != entries_.end();) {
      if (!live.count(it->first)) {
        it = entries_.erase(it);
      } else {
        ++it;
      }
    }
  }

  void clear() {
    std::lock_guard<std::mutex> lock(mu_);
    entries_.clear();
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

  CacheStats& stats() { return stats_; }
  uint64_t computed_count() const { return stats_.computed.load(); }
  uint64_t reused_count() const { return stats_.reused.load(); }

 private:
  mutable std::mutex mu_;
  std::map<Key, std::shared_ptr<const Message>> entries_;
  mutable CacheStats stats_;
};

// Everything message passing needs for one training run.
struct MessageContext {
  const Database* db = nullptr;
  SemiRing sr = SemiRing::count_ring();
  std::map<std::string, LiftSpec> lifts;  // relations absent here use identity
  MessageCache* cache = nullptr;
  bool use_identity_optimization = true;
  std::string debug_dump_dir;  // when set, freshly computed payloads land here as CSV

  const LiftSpec& lift_of(const std::string& rel) const {
    static const LiftSpec identity{};
    auto it = lifts.find(rel);
    return it == lifts.end() ? identity : it->second;
  }

  bool relation_annotated(const std::string& rel) const { return !lift_of(rel).is_identity(); }

  std::set<std::string> annotated_relations() const {
    std::set<std::string> out;
    for (const auto& [rel, spec] : lifts) {
      if (!spec.is_identity()) out.insert(rel);
    }
    return out;
  }
};

// Cache key fingerprint of a message on `edge` given the node's predicates:
// covers the sender-side relations' predicate digests, versions, and lifts.
MessageCache::Key message_key(const MessageContext& ctx, const DirectedEdge& edge,
                              const PredicateList& preds);

// Computes (or fetches) the message for a directed edge given a node's
// predicate set, recursing into the sender subtree.
std::shared_ptr<const Message> compute_message(const MessageContext& ctx, const DirectedEdge& edge,
                                               const PredicateList& preds);

// Joins `root` with all incoming messages under the node's predicates and
// applies the final group-by (0 or 1 attribute; more for cuboids). Output has
// the group columns plus aggregated annotations.
AnnotatedRelation absorb(const MessageContext& ctx, const std::string& root,
                         const PredicateList& preds, const std::vector<std::string>& group_attrs);

// Split reuse planning: after a predicate lands on split_relation, a message
// is reusable by the children iff the split relation is outside its sender
// side. Returns directed edges (reused, invalidated).
std::pair<std::set<DirectedEdge>, std::set<DirectedEdge>> reuse_after_split(
    const JoinGraph& graph, const std::string& split_relation);

// Dumps a message payload as CSV (debug flag in the CLI).
std::string message_to_csv(const Database& db, const Message& msg);

}  // namespace factorboost
