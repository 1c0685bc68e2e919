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

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "factorboost/common.hpp"

namespace factorboost {

enum class ColumnKind { numeric, categorical, key };

inline const char* column_kind_name(ColumnKind k) {
  switch (k) {
    case ColumnKind::numeric: return "numeric";
    case ColumnKind::categorical: return "categorical";
    case ColumnKind::key: return "key";
  }
  return "?";
}

// Dense string -> 32-bit code dictionary, built in first-appearance order.
// Join keys share one dictionary across relations so codes line up.
class Dictionary {
 public:
  uint32_t encode(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    uint32_t code = static_cast<uint32_t>(labels_.size());
    labels_.push_back(token);
    index_.emplace(labels_.back(), code);
    return code;
  }

  // Returns UINT32_MAX when the token is unknown.
  uint32_t lookup(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? UINT32_MAX : it->second;
  }

  const std::string& decode(uint32_t code) const {
    check(code < labels_.size(), "dictionary code out of range");
    return labels_[code];
  }

  uint32_t size() const { return static_cast<uint32_t>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, uint32_t> index_;
};

// One bit per row; an empty mask means every row is valid.
class ValidityMask {
 public:
  ValidityMask() = default;

  bool all_valid() const { return words_.empty(); }
  bool get(size_t i) const { return words_.empty() || ((words_[i >> 6] >> (i & 63)) & 1u); }

  void set_invalid(size_t i, size_t row_count) {
    materialize(row_count);
    words_[i >> 6] &= ~(uint64_t(1) << (i & 63));
  }

  void set_valid(size_t i, size_t row_count) {
    materialize(row_count);
    words_[i >> 6] |= uint64_t(1) << (i & 63);
  }

  size_t count_valid(size_t row_count) const {
    if (words_.empty()) return row_count;
    size_t n = 0;
    for (size_t i = 0; i < row_count; ++i) n += get(i);
    return n;
  }

  const std::vector<uint64_t>& words() const { return words_; }

 private:
  void materialize(size_t row_count) {
    if (words_.empty()) words_.assign((row_count + 63) / 64, ~uint64_t(0));
  }

  std::vector<uint64_t> words_;
};

struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  std::vector<double> num;       // numeric values
  std::vector<uint32_t> codes;   // categorical/key codes
  ValidityMask validity;
  std::shared_ptr<Dictionary> dict;  // categorical/key only

  size_t size() const { return kind == ColumnKind::numeric ? num.size() : codes.size(); }
  bool is_valid(size_t i) const { return validity.get(i); }
};

class Relation {
 public:
  Relation() = default;
  explicit Relation(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }
  size_t row_count() const { return row_count_; }
  void set_row_count(size_t n) { row_count_ = n; }

  size_t column_count() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }

  void add_column(Column col) {
    check(index_.find(col.name) == index_.end(), "duplicate column name '" + col.name + "' in relation '" + name_ + "'");
    if (columns_.empty() && row_count_ == 0) row_count_ = col.size();
    check(col.size() == row_count_, "column '" + col.name + "' length mismatch in relation '" + name_ + "'");
    index_.emplace(col.name, columns_.size());
    columns_.push_back(std::move(col));
  }

  bool has_column(const std::string& name) const { return index_.count(name) > 0; }

  const Column& column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail("unknown column '" + name + "' in relation '" + name_ + "'");
    return columns_[it->second];
  }

  Column& column_mut(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) fail("unknown column '" + name + "' in relation '" + name_ + "'");
    return columns_[it->second];
  }

  // Exclusive column replacement. The new values vector is installed by move,
  // so the cost does not depend on how many other columns the relation has.
  // Callers must hold exclusive access (no concurrent readers).
  void swap_column(const std::string& name, std::vector<double> values, ValidityMask validity = {}) {
    Column& c = column_mut(name);
    check(c.kind == ColumnKind::numeric, "swap_column value type mismatch for '" + name + "'");
    check(values.size() == row_count_, "swap_column length mismatch for '" + name + "'");
    c.num = std::move(values);
    c.validity = std::move(validity);
    ++version_;
  }

  void swap_column(const std::string& name, std::vector<uint32_t> values, ValidityMask validity = {}) {
    Column& c = column_mut(name);
    check(c.kind != ColumnKind::numeric, "swap_column value type mismatch for '" + name + "'");
    check(values.size() == row_count_, "swap_column length mismatch for '" + name + "'");
    c.codes = std::move(values);
    c.validity = std::move(validity);
    ++version_;
  }

  // Bumped on every swap; message caches key on it.
  uint64_t version() const { return version_; }

 private:
  std::string name_;
  size_t row_count_ = 0;
  std::vector<Column> columns_;
  std::unordered_map<std::string, size_t> index_;
  uint64_t version_ = 0;
};

// Content checksum over all columns (values + validity). Test helper for the
// "swap never touches other columns" invariant.
uint64_t relation_checksum(const Relation& rel, const std::string& skip_column = "");

}  // namespace factorboost
