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

#include <memory>
#include <string>
#include <vector>

#include "factorboost/relation.hpp"

namespace factorboost {

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  bool nullable = false;
  // Optional shared dictionary (join keys must share one across relations).
  std::shared_ptr<Dictionary> dict;
};

// RFC 4180 reader: quoted fields, doubled-quote escapes, embedded newlines,
// CRLF or LF records. The header row is required and must list exactly the
// declared column names in order. Empty cells become nulls.
Relation load_csv(const std::string& path, const std::string& relation_name,
                  const std::vector<ColumnSpec>& schema);

// Same parser over an in-memory buffer (tests use this a lot).
Relation load_csv_string(const std::string& text, const std::string& relation_name,
                         const std::vector<ColumnSpec>& schema);

// Writes RFC 4180 output; numerics use 17 significant digits, nulls are
// empty cells, codes are decoded through the column dictionary.
void write_csv(const Relation& rel, const std::string& path);
std::string write_csv_string(const Relation& rel);

}  // namespace factorboost
