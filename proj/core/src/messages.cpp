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
#include "factorboost/messages.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace factorboost {

namespace {

void maybe_dump(const MessageContext& ctx, const Message& msg) {
  if (ctx.debug_dump_dir.empty()) return;
  char name[160];
  std::snprintf(name, sizeof(name), "%s/m_%s_to_%s_%016llx.csv", ctx.debug_dump_dir.c_str(),
                msg.edge.from.c_str(), msg.edge.to.c_str(),
                static_cast<unsigned long long>(msg.fingerprint));
  std::ofstream out(name, std::ios::binary);
  if (out.good()) out << message_to_csv(*ctx.db, msg);
}

}  // namespace

namespace {

// Per-row annotation reader for one relation under a LiftSpec.
struct RowLift {
  const SemiRing* sr;
  const Column* y = nullptr;
  std::vector<const Column*> ann_cols;
  const Column* weight = nullptr;
  AnnotationValue one;

  RowLift(const Relation& rel, const LiftSpec& spec, const SemiRing& ring) : sr(&ring), one(ring.one()) {
    if (!spec.y_column.empty()) {
      y = &rel.column(spec.y_column);
      check(spec.ann_columns.empty(), "lift cannot mix a target column with annotation columns");
    } else if (!spec.ann_columns.empty()) {
      check(spec.ann_columns.size() == ring.arity(),
            "lift for '" + rel.name() + "' must provide one column per semi-ring component");
      for (const std::string& c : spec.ann_columns) ann_cols.push_back(&rel.column(c));
    }
    if (!spec.weight_column.empty()) weight = &rel.column(spec.weight_column);
  }

  void fill(size_t row, double* out) const {
    if (y != nullptr) {
      check(y->is_valid(row), "target column has a null value");
      if (sr->kind() == SemiRingKind::class_count) {
        for (size_t i = 0; i < sr->arity(); ++i) out[i] = 0.0;
        out[0] = 1.0;
        check(y->codes[row] + 1 < sr->arity(), "target class code out of range");
        out[1 + y->codes[row]] = 1.0;
      } else {
        double val = y->kind == ColumnKind::numeric ? y->num[row] : static_cast<double>(y->codes[row]);
        out[0] = 1.0;
        if (sr->arity() > 1) out[1] = val;
        if (sr->arity() > 2) out[2] = val * val;
      }
    } else if (!ann_cols.empty()) {
      for (size_t i = 0; i < ann_cols.size(); ++i) out[i] = ann_cols[i]->num[row];
    } else {
      for (size_t i = 0; i < one.arity(); ++i) out[i] = one[i];
    }
    if (weight) {
      double w = weight->is_valid(row) ? weight->num[row] : 0.0;
      for (size_t i = 0; i < sr->arity(); ++i) out[i] *= w;
    }
  }
};

// One incoming message bound to the receiver's rows on that edge.
struct BoundMessage {
  const std::vector<uint32_t>* codes;   // receiver-side edge codes per row
  const std::vector<char>* present;     // sender-side unfiltered presence
  std::shared_ptr<const Message> msg;
  bool outer = false;                   // edge joins as left outer at receiver

  // Applies this message to a row's annotation; returns false when the row is
  // filtered out.
  bool apply(const SemiRing& sr, size_t row, double* ann) const {
    uint32_t code = (*codes)[row];
    bool missing = code == EdgeInfo::kNullKey || !(*present)[code];
    if (missing) return outer;  // missing key: keep under outer join, else drop
    switch (msg->kind) {
      case MessageKind::identity:
        return true;
      case MessageKind::semijoin:
        return msg->member[code] != 0;
      case MessageKind::full: {
        int32_t slot = msg->slot_of_code[code];
        if (slot < 0) return false;  // filtered out upstream
        double local[16];
        double* buf = local;
        std::vector<double> heap;
        if (sr.arity() > 16) {
          heap.resize(sr.arity());
          buf = heap.data();
        }
        for (size_t i = 0; i < sr.arity(); ++i) buf[i] = msg->ann[i][slot];
        sr.mul_accumulate(ann, buf);
        return true;
      }
    }
    return false;
  }
};

std::vector<BoundMessage> bind_incoming(const MessageContext& ctx, const std::string& receiver,
                                        const std::string& exclude, const PredicateList& preds);

}  // namespace

MessageCache::Key message_key(const MessageContext& ctx, const DirectedEdge& edge,
                              const PredicateList& preds) {
  std::set<std::string> senders = sender_side(ctx.db->graph, edge);
  uint64_t fp = hash_combine(static_cast<uint64_t>(ctx.sr.kind()), ctx.sr.arity());
  fp = hash_combine(fp, ctx.use_identity_optimization ? 1 : 0);
  for (const std::string& rel : senders) {  // std::set iterates sorted
    fp = hash_combine(fp, hash_str(rel));
    fp = hash_combine(fp, ctx.db->relation(rel).version());
    fp = hash_combine(fp, relation_predicate_digest(rel, preds));
    fp = hash_combine(fp, ctx.lift_of(rel).digest());
  }
  const JoinEdge& e = ctx.db->graph.edge(edge.edge_index);
  return MessageCache::Key{edge.edge_index, edge.from == e.rel_a, fp};
}

std::shared_ptr<const Message> compute_message(const MessageContext& ctx, const DirectedEdge& edge,
                                               const PredicateList& preds) {
  check(ctx.db != nullptr, "message context has no database");
  MessageCache::Key key = message_key(ctx, edge, preds);
  if (ctx.cache) {
    if (auto hit = ctx.cache->get(key)) return hit;
  }

  const Database& db = *ctx.db;
  const JoinGraph& graph = db.graph;
  const JoinEdge& e = graph.edge(edge.edge_index);
  const EdgeInfo& info = db.edge_info[static_cast<size_t>(edge.edge_index)];
  const Relation& sender = db.relation(edge.from);

  auto msg = std::make_shared<Message>();
  msg->edge = edge;
  msg->depends_on = sender_side(graph, edge);
  msg->fingerprint = key.fingerprint;

  // Children messages (all neighbors of the sender except the receiver).
  std::vector<BoundMessage> incoming = bind_incoming(ctx, edge.from, edge.to, preds);

  bool subtree_annotated = false;
  bool subtree_has_preds = false;
  for (const std::string& rel : msg->depends_on) {
    subtree_annotated |= ctx.relation_annotated(rel);
    subtree_has_preds |= relation_has_predicates(rel, preds);
  }
  bool children_light = true;  // identity or semijoin children only
  bool children_identity = true;
  for (const BoundMessage& bm : incoming) {
    children_light &= bm.msg->kind != MessageKind::full;
    children_identity &= bm.msg->kind == MessageKind::identity;
  }
  bool sender_unique = info.unique_of(e, edge.from);

  if (ctx.use_identity_optimization && !subtree_annotated && children_light && sender_unique) {
    if (!subtree_has_preds && children_identity && e.is_one_side(edge.from) && info.complete) {
      msg->kind = MessageKind::identity;
      if (ctx.cache) return ctx.cache->put(key, msg);
      return msg;
    }
    // Annotations are provably all-one: emit key membership only.
    msg->kind = MessageKind::semijoin;
    msg->member.assign(info.code_space, 0);
    const std::vector<uint32_t>& out_codes = info.codes_of(e, edge.from);
    std::vector<uint32_t> selection = select_rows(sender, edge.from, preds);
    size_t n = 0;
    for (uint32_t row : selection) {
      uint32_t code = out_codes[row];
      if (code == EdgeInfo::kNullKey) continue;
      bool keep = true;
      double dummy = 0;
      for (const BoundMessage& bm : incoming) {
        // semijoin/identity children never multiply, only filter
        if (!bm.apply(ctx.sr, row, &dummy)) {
          keep = false;
          break;
        }
      }
      if (keep) {
        msg->member[code] = 1;
        ++n;
      }
    }
    ExecStats::global().note_intermediate(n);
    maybe_dump(ctx, *msg);
    if (ctx.cache) return ctx.cache->put(key, msg);
    return msg;
  }

  // Full payload: gamma over the edge key of sigma(sender) joined with the
  // incoming messages.
  msg->kind = MessageKind::full;
  msg->slot_of_code.assign(info.code_space, -1);
  msg->ann.assign(ctx.sr.arity(), {});
  const std::vector<uint32_t>& out_codes = info.codes_of(e, edge.from);
  RowLift lift(sender, ctx.lift_of(edge.from), ctx.sr);
  std::vector<uint32_t> selection = select_rows(sender, edge.from, preds);
  std::vector<double> ann(ctx.sr.arity());
  for (uint32_t row : selection) {
    uint32_t code = out_codes[row];
    if (code == EdgeInfo::kNullKey) continue;
    lift.fill(row, ann.data());
    bool keep = true;
    for (const BoundMessage& bm : incoming) {
      if (!bm.apply(ctx.sr, row, ann.data())) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    int32_t slot = msg->slot_of_code[code];
    if (slot < 0) {
      slot = static_cast<int32_t>(msg->keys.size());
      msg->slot_of_code[code] = slot;
      msg->keys.push_back(code);
      for (size_t i = 0; i < ctx.sr.arity(); ++i) msg->ann[i].push_back(0.0);
    }
    for (size_t i = 0; i < ctx.sr.arity(); ++i) msg->ann[i][static_cast<size_t>(slot)] += ann[i];
  }
  ExecStats::global().note_intermediate(msg->keys.size());
  maybe_dump(ctx, *msg);
  if (ctx.cache) return ctx.cache->put(key, msg);
  return msg;
}

namespace {

std::vector<BoundMessage> bind_incoming(const MessageContext& ctx, const std::string& receiver,
                                        const std::string& exclude, const PredicateList& preds) {
  const Database& db = *ctx.db;
  std::vector<BoundMessage> out;
  for (int ei : db.graph.incident_edges(receiver)) {
    const JoinEdge& e = db.graph.edge(ei);
    const std::string& other = e.other(receiver);
    if (other == exclude) continue;
    DirectedEdge child_edge{ei, other, receiver};
    BoundMessage bm;
    bm.msg = compute_message(ctx, child_edge, preds);
    const EdgeInfo& info = db.edge_info[static_cast<size_t>(ei)];
    bm.codes = &info.codes_of(e, receiver);
    bm.present = &info.present_of(e, other);
    bm.outer = e.join_outer;
    out.push_back(std::move(bm));
  }
  return out;
}

}  // namespace

AnnotatedRelation absorb(const MessageContext& ctx, const std::string& root,
                         const PredicateList& preds, const std::vector<std::string>& group_attrs) {
  const Database& db = *ctx.db;
  const Relation& rel = db.relation(root);
  std::vector<BoundMessage> incoming = bind_incoming(ctx, root, "", preds);
  RowLift lift(rel, ctx.lift_of(root), ctx.sr);
  std::vector<uint32_t> selection = select_rows(rel, root, preds);

  const size_t arity = ctx.sr.arity();
  AnnotatedRelation out;
  out.sr = ctx.sr;
  out.base.set_name(root);

  std::vector<const Column*> group_cols;
  for (const std::string& g : group_attrs) group_cols.push_back(&rel.column(g));

  // Group slots: single-attribute grouping keys exactly on the bit pattern
  // (nulls get a dedicated slot); multi-attribute grouping (cuboids) goes
  // through a tuple map with exact equality.
  std::unordered_map<uint64_t, size_t> slots1;
  std::unordered_map<std::string, size_t> slotsN;
  int64_t null_slot = -1;
  std::vector<uint32_t> rep_rows;  // first row of each group
  std::vector<std::vector<double>> acc(arity);
  std::vector<double> ann(arity);
  bool any_row = false;

  auto new_slot = [&](uint32_t row) {
    rep_rows.push_back(row);
    for (size_t i = 0; i < arity; ++i) acc[i].push_back(0.0);
  };

  auto slot_for = [&](uint32_t row) -> size_t {
    if (group_cols.empty()) {
      if (rep_rows.empty()) new_slot(row);
      return 0;
    }
    if (group_cols.size() == 1) {
      const Column& c = *group_cols[0];
      if (!c.is_valid(row)) {
        if (null_slot < 0) {
          null_slot = static_cast<int64_t>(rep_rows.size());
          new_slot(row);
        }
        return static_cast<size_t>(null_slot);
      }
      uint64_t bits;
      if (c.kind == ColumnKind::numeric) {
        std::memcpy(&bits, &c.num[row], sizeof(bits));
      } else {
        bits = c.codes[row];
      }
      auto [it, inserted] = slots1.try_emplace(bits, rep_rows.size());
      if (inserted) new_slot(row);
      return it->second;
    }
    std::string key;
    key.reserve(group_cols.size() * 9);
    for (const Column* c : group_cols) {
      if (!c->is_valid(row)) {
        key.push_back('n');
        continue;
      }
      key.push_back('v');
      uint64_t bits = 0;
      if (c->kind == ColumnKind::numeric) {
        std::memcpy(&bits, &c->num[row], sizeof(double));
      } else {
        bits = c->codes[row];
      }
      key.append(reinterpret_cast<const char*>(&bits), sizeof(bits));
    }
    auto [it, inserted] = slotsN.try_emplace(std::move(key), rep_rows.size());
    if (inserted) new_slot(row);
    return it->second;
  };

  for (uint32_t row : selection) {
    lift.fill(row, ann.data());
    bool keep = true;
    for (const BoundMessage& bm : incoming) {
      if (!bm.apply(ctx.sr, row, ann.data())) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    any_row = true;
    size_t slot = slot_for(row);
    for (size_t i = 0; i < arity; ++i) acc[i][slot] += ann[i];
  }
  (void)any_row;

  // Assemble output columns from representative rows.
  size_t n_groups = rep_rows.size();
  out.base.set_row_count(n_groups);
  for (size_t gi = 0; gi < group_cols.size(); ++gi) {
    const Column& src = *group_cols[gi];
    Column dst;
    dst.name = src.name;
    dst.kind = src.kind;
    dst.dict = src.dict;
    std::vector<size_t> invalid;
    for (size_t s = 0; s < n_groups; ++s) {
      uint32_t row = rep_rows[s];
      bool valid = src.is_valid(row);
      if (dst.kind == ColumnKind::numeric) {
        dst.num.push_back(valid ? src.num[row] : 0.0);
      } else {
        dst.codes.push_back(valid ? src.codes[row] : 0);
      }
      if (!valid) invalid.push_back(s);
    }
    for (size_t s : invalid) dst.validity.set_invalid(s, n_groups);
    out.base.add_column(std::move(dst));
  }
  out.ann = std::move(acc);
  ExecStats::global().note_intermediate(n_groups);
  return out;
}

std::pair<std::set<DirectedEdge>, std::set<DirectedEdge>> reuse_after_split(
    const JoinGraph& graph, const std::string& split_relation) {
  std::set<DirectedEdge> reused, invalidated;
  for (size_t ei = 0; ei < graph.edges.size(); ++ei) {
    const JoinEdge& e = graph.edges[ei];
    for (const std::string& from : {e.rel_a, e.rel_b}) {
      DirectedEdge d{static_cast<int>(ei), from, e.other(from)};
      if (sender_side(graph, d).count(split_relation)) {
        invalidated.insert(d);
      } else {
        reused.insert(d);
      }
    }
  }
  return {reused, invalidated};
}

std::string message_to_csv(const Database& db, const Message& msg) {
  (void)db;
  std::string out = "key_code";
  if (msg.kind == MessageKind::full) {
    for (size_t i = 0; i < msg.ann.size(); ++i) out += ",ann_" + std::to_string(i);
    out.push_back('\n');
    for (size_t s = 0; s < msg.keys.size(); ++s) {
      out += std::to_string(msg.keys[s]);
      for (size_t i = 0; i < msg.ann.size(); ++i) out += "," + format_double(msg.ann[i][s]);
      out.push_back('\n');
    }
  } else if (msg.kind == MessageKind::semijoin) {
    out += "\n";
    for (size_t c = 0; c < msg.member.size(); ++c) {
      if (msg.member[c]) out += std::to_string(c) + "\n";
    }
  } else {
    out += "\n";  // identity: no payload
  }
  return out;
}

}  // namespace factorboost
