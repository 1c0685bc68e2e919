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
#include "factorboost/engine.hpp"

#include <algorithm>
#include <cstring>
#include <unordered_map>

namespace factorboost {

namespace {

// Row key over a column subset: (validity, payload) per column, hashed for
// grouping. Numerics are compared by bit pattern.
struct RowKeyCodec {
  std::vector<const Column*> cols;

  void encode(size_t row, std::vector<uint64_t>* out) const {
    out->clear();
    for (const Column* c : cols) {
      bool valid = c->is_valid(row);
      out->push_back(valid ? 1 : 0);
      if (!valid) {
        out->push_back(0);
      } else if (c->kind == ColumnKind::numeric) {
        uint64_t bits;
        std::memcpy(&bits, &c->num[row], sizeof(bits));
        out->push_back(bits);
      } else {
        out->push_back(c->codes[row]);
      }
    }
  }

  bool all_valid(size_t row) const {
    for (const Column* c : cols) {
      if (!c->is_valid(row)) return false;
    }
    return true;
  }
};

struct VecHash {
  size_t operator()(const std::vector<uint64_t>& v) const {
    return fnv1a64(v.data(), v.size() * sizeof(uint64_t));
  }
};

// Row-at-a-time column assembly; validity bits are applied once the final
// row count is known.
struct ColumnBuilder {
  Column col;
  std::vector<size_t> invalid_rows;
  size_t n = 0;

  explicit ColumnBuilder(const Column& like) {
    col.name = like.name;
    col.kind = like.kind;
    col.dict = like.dict;
  }

  void push(const Column& src, size_t row) {
    bool valid = src.is_valid(row);
    if (col.kind == ColumnKind::numeric) {
      col.num.push_back(valid ? src.num[row] : 0.0);
    } else {
      col.codes.push_back(valid ? src.codes[row] : 0);
    }
    if (!valid) invalid_rows.push_back(n);
    ++n;
  }

  void push_null() {
    if (col.kind == ColumnKind::numeric) {
      col.num.push_back(0.0);
    } else {
      col.codes.push_back(0);
    }
    invalid_rows.push_back(n);
    ++n;
  }

  Column finish() {
    for (size_t r : invalid_rows) col.validity.set_invalid(r, n);
    return std::move(col);
  }
};

void finish_into(Relation& rel, std::vector<ColumnBuilder>& builders, size_t rows) {
  rel.set_row_count(rows);
  for (ColumnBuilder& b : builders) rel.add_column(b.finish());
}

void fetch_annotation(const AnnotatedRelation& rel, size_t row, double* out) {
  for (size_t i = 0; i < rel.ann.size(); ++i) out[i] = rel.ann[i][row];
}

}  // namespace

AnnotatedRelation annotate_constant(const Relation& rel, const SemiRing& sr, const AnnotationValue& value) {
  AnnotatedRelation out;
  out.base = rel;
  out.sr = sr;
  out.ann.assign(sr.arity(), std::vector<double>(rel.row_count()));
  for (size_t i = 0; i < sr.arity(); ++i) {
    std::fill(out.ann[i].begin(), out.ann[i].end(), value[i]);
  }
  return out;
}

AnnotatedRelation annotate_target(const Relation& rel, const SemiRing& sr, const std::string& y_column,
                                  const std::string& weight_column) {
  AnnotatedRelation out;
  out.base = rel;
  out.sr = sr;
  out.ann.assign(sr.arity(), std::vector<double>(rel.row_count()));
  const Column& y = rel.column(y_column);
  const Column* w = weight_column.empty() ? nullptr : &rel.column(weight_column);
  for (size_t r = 0; r < rel.row_count(); ++r) {
    check(y.is_valid(r), "target column '" + y_column + "' has a null value");
    double weight = w ? w->num[r] : 1.0;
    AnnotationValue v = sr.kind() == SemiRingKind::class_count
                            ? sr.lift_class(y.codes[r], weight)
                            : sr.lift_target(y.kind == ColumnKind::numeric
                                                 ? y.num[r]
                                                 : static_cast<double>(y.codes[r]),
                                             weight);
    for (size_t i = 0; i < sr.arity(); ++i) out.ann[i][r] = v[i];
  }
  return out;
}

AnnotatedRelation groupby_aggregate(const AnnotatedRelation& rel,
                                    const std::vector<std::string>& group_attrs) {
  rel.validate_shape();
  const size_t arity = rel.sr.arity();

  AnnotatedRelation out;
  out.sr = rel.sr;

  RowKeyCodec codec;
  std::vector<ColumnBuilder> builders;
  for (const std::string& name : group_attrs) {
    const Column& c = rel.base.column(name);
    codec.cols.push_back(&c);
    builders.emplace_back(c);
  }

  std::unordered_map<std::vector<uint64_t>, size_t, VecHash> groups;
  std::vector<std::vector<double>> acc(arity);
  std::vector<uint64_t> key;
  size_t n_groups = 0;
  if (group_attrs.empty() && rel.row_count() > 0) {
    // gamma with no group attribute: a single total row.
    n_groups = 1;
    for (size_t i = 0; i < arity; ++i) acc[i].assign(1, 0.0);
    for (size_t r = 0; r < rel.row_count(); ++r) {
      for (size_t i = 0; i < arity; ++i) acc[i][0] += rel.ann[i][r];
    }
  } else {
    for (size_t r = 0; r < rel.row_count(); ++r) {
      codec.encode(r, &key);
      auto [it, inserted] = groups.try_emplace(key, n_groups);
      size_t g = it->second;
      if (inserted) {
        ++n_groups;
        for (size_t i = 0; i < group_attrs.size(); ++i) builders[i].push(*codec.cols[i], r);
        for (size_t i = 0; i < arity; ++i) acc[i].push_back(0.0);
      }
      for (size_t i = 0; i < arity; ++i) acc[i][g] += rel.ann[i][r];
    }
  }

  out.base.set_name(rel.base.name());
  finish_into(out.base, builders, n_groups);
  out.ann = std::move(acc);
  ExecStats::global().note_intermediate(n_groups);
  return out;
}

AnnotatedRelation join_annotated(const AnnotatedRelation& left, const AnnotatedRelation& right,
                                 const std::vector<std::string>& keys, JoinKind kind) {
  left.validate_shape();
  right.validate_shape();
  check(left.sr.kind() == right.sr.kind() && left.sr.arity() == right.sr.arity(),
        "joined relations must share a semi-ring");
  for (const std::string& k : keys) {
    check(left.base.column(k).kind == right.base.column(k).kind,
          "join key '" + k + "' kind mismatch");
  }

  // Build on the smaller side for inner joins; left outer always builds right
  // so output order follows the left rows.
  bool build_right = kind == JoinKind::left_outer || right.row_count() <= left.row_count();
  const AnnotatedRelation& build = build_right ? right : left;
  const AnnotatedRelation& probe = build_right ? left : right;

  RowKeyCodec build_codec, probe_codec;
  for (const std::string& k : keys) {
    build_codec.cols.push_back(&build.base.column(k));
    probe_codec.cols.push_back(&probe.base.column(k));
  }

  std::unordered_map<std::vector<uint64_t>, std::vector<uint32_t>, VecHash> table;
  std::vector<uint64_t> key;
  for (size_t r = 0; r < build.row_count(); ++r) {
    if (!build_codec.all_valid(r)) continue;  // null keys never match
    build_codec.encode(r, &key);
    table[key].push_back(static_cast<uint32_t>(r));
  }

  const size_t arity = left.sr.arity();
  AnnotatedRelation out;
  out.sr = left.sr;
  out.init_annotation_columns();

  // Output schema: all left columns, then right columns not among the keys.
  std::vector<ColumnBuilder> builders;
  std::vector<const Column*> from_left, from_right;
  for (const Column& c : left.base.columns()) {
    builders.emplace_back(c);
    from_left.push_back(&c);
  }
  for (const Column& c : right.base.columns()) {
    if (std::find(keys.begin(), keys.end(), c.name) != keys.end()) continue;
    if (left.base.has_column(c.name)) continue;  // avoid duplicate names
    builders.emplace_back(c);
    from_right.push_back(&c);
  }

  size_t n_out = 0;
  std::vector<double> la(arity), ra(arity), prod(arity);
  auto emit = [&](size_t left_row, int64_t right_row) {
    for (size_t i = 0; i < from_left.size(); ++i) builders[i].push(*from_left[i], left_row);
    for (size_t i = 0; i < from_right.size(); ++i) {
      if (right_row < 0) {
        builders[from_left.size() + i].push_null();
      } else {
        builders[from_left.size() + i].push(*from_right[i], static_cast<size_t>(right_row));
      }
    }
    if (right_row < 0) {
      for (size_t i = 0; i < arity; ++i) out.ann[i].push_back(left.ann[i][left_row]);
    } else {
      fetch_annotation(left, left_row, la.data());
      fetch_annotation(right, static_cast<size_t>(right_row), ra.data());
      out.sr.mul_into(la.data(), ra.data(), prod.data());
      for (size_t i = 0; i < arity; ++i) out.ann[i].push_back(prod[i]);
    }
    ++n_out;
  };

  for (size_t r = 0; r < probe.row_count(); ++r) {
    const std::vector<uint32_t>* matches = nullptr;
    if (probe_codec.all_valid(r)) {
      probe_codec.encode(r, &key);
      auto it = table.find(key);
      if (it != table.end()) matches = &it->second;
    }
    if (matches) {
      for (uint32_t m : *matches) {
        if (build_right) {
          emit(r, static_cast<int64_t>(m));
        } else {
          emit(m, static_cast<int64_t>(r));
        }
      }
    } else if (kind == JoinKind::left_outer) {
      emit(r, -1);
    }
  }

  out.base.set_name(left.base.name());
  finish_into(out.base, builders, n_out);
  ExecStats::global().note_intermediate(n_out);
  return out;
}

AnnotatedRelation theta_join(const AnnotatedRelation& left, const AnnotatedRelation& right,
                             const std::function<bool(size_t, size_t)>& predicate) {
  left.validate_shape();
  right.validate_shape();
  check(left.sr.kind() == right.sr.kind() && left.sr.arity() == right.sr.arity(),
        "joined relations must share a semi-ring");
  const size_t arity = left.sr.arity();
  AnnotatedRelation out;
  out.sr = left.sr;
  out.init_annotation_columns();
  std::vector<ColumnBuilder> builders;
  std::vector<const Column*> from_left, from_right;
  for (const Column& c : left.base.columns()) {
    builders.emplace_back(c);
    from_left.push_back(&c);
  }
  for (const Column& c : right.base.columns()) {
    if (left.base.has_column(c.name)) continue;
    builders.emplace_back(c);
    from_right.push_back(&c);
  }
  size_t n_out = 0;
  std::vector<double> la(arity), ra(arity), prod(arity);
  for (size_t l = 0; l < left.row_count(); ++l) {
    for (size_t r = 0; r < right.row_count(); ++r) {
      if (!predicate(l, r)) continue;
      for (size_t i = 0; i < from_left.size(); ++i) builders[i].push(*from_left[i], l);
      for (size_t i = 0; i < from_right.size(); ++i) builders[from_left.size() + i].push(*from_right[i], r);
      fetch_annotation(left, l, la.data());
      fetch_annotation(right, r, ra.data());
      out.sr.mul_into(la.data(), ra.data(), prod.data());
      for (size_t i = 0; i < arity; ++i) out.ann[i].push_back(prod[i]);
      ++n_out;
    }
  }
  out.base.set_name(left.base.name());
  finish_into(out.base, builders, n_out);
  ExecStats::global().note_intermediate(n_out);
  return out;
}

AnnotatedRelation semijoin_filter(const AnnotatedRelation& rel, const std::vector<std::string>& keys,
                                  const AnnotatedRelation& key_set) {
  rel.validate_shape();
  RowKeyCodec rel_codec, set_codec;
  for (const std::string& k : keys) {
    rel_codec.cols.push_back(&rel.base.column(k));
    set_codec.cols.push_back(&key_set.base.column(k));
  }
  std::unordered_set<std::vector<uint64_t>, VecHash> members;
  std::vector<uint64_t> key;
  for (size_t r = 0; r < key_set.row_count(); ++r) {
    set_codec.encode(r, &key);
    members.insert(key);
  }

  AnnotatedRelation out;
  out.sr = rel.sr;
  out.init_annotation_columns();
  std::vector<ColumnBuilder> builders;
  for (const Column& c : rel.base.columns()) builders.emplace_back(c);
  size_t n_out = 0;
  for (size_t r = 0; r < rel.row_count(); ++r) {
    rel_codec.encode(r, &key);
    if (!members.count(key)) continue;
    for (size_t i = 0; i < builders.size(); ++i) builders[i].push(rel.base.columns()[i], r);
    for (size_t i = 0; i < rel.sr.arity(); ++i) out.ann[i].push_back(rel.ann[i][r]);
    ++n_out;
  }
  out.base.set_name(rel.base.name());
  finish_into(out.base, builders, n_out);
  ExecStats::global().note_intermediate(n_out);
  return out;
}

AnnotatedRelation prefix_sum_ordered(const AnnotatedRelation& grouped, const std::string& order_attr) {
  grouped.validate_shape();
  const Column& order = grouped.base.column(order_attr);
  std::vector<size_t> idx;
  int64_t null_row = -1;
  for (size_t r = 0; r < grouped.row_count(); ++r) {
    if (!order.is_valid(r)) {
      check(null_row < 0, "duplicate null group in '" + order_attr + "'");
      null_row = static_cast<int64_t>(r);
      continue;
    }
    idx.push_back(r);
  }
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    if (order.kind == ColumnKind::numeric) return order.num[a] < order.num[b];
    return order.codes[a] < order.codes[b];
  });
  for (size_t i = 1; i < idx.size(); ++i) {
    bool dup = order.kind == ColumnKind::numeric ? order.num[idx[i - 1]] == order.num[idx[i]]
                                                 : order.codes[idx[i - 1]] == order.codes[idx[i]];
    check(!dup, "prefix_sum_ordered requires distinct '" + order_attr + "' values");
  }
  if (null_row >= 0) idx.push_back(static_cast<size_t>(null_row));

  AnnotatedRelation out;
  out.sr = grouped.sr;
  out.init_annotation_columns();
  std::vector<ColumnBuilder> builders;
  for (const Column& c : grouped.base.columns()) builders.emplace_back(c);

  AnnotationValue running = grouped.sr.zero();
  size_t n_out = 0;
  for (size_t pos = 0; pos < idx.size(); ++pos) {
    size_t r = idx[pos];
    bool is_null_row = static_cast<int64_t>(r) == null_row;
    for (size_t i = 0; i < builders.size(); ++i) builders[i].push(grouped.base.columns()[i], r);
    if (is_null_row) {
      // Emitted last, excluded from the running prefix.
      for (size_t i = 0; i < out.sr.arity(); ++i) out.ann[i].push_back(grouped.ann[i][r]);
    } else {
      grouped.sr.accumulate(running.v.data(), grouped.annotation(r).v.data());
      for (size_t i = 0; i < out.sr.arity(); ++i) out.ann[i].push_back(running[i]);
    }
    ++n_out;
  }
  out.base.set_name(grouped.base.name());
  finish_into(out.base, builders, n_out);
  ExecStats::global().note_intermediate(n_out);
  return out;
}

}  // namespace factorboost
