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
#include "factorboost/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace factorboost {

namespace {

struct CsvCursor {
  const std::string& text;
  size_t pos = 0;

  bool at_end() const { return pos >= text.size(); }

  // Reads one record into `fields`. Returns false at end of input.
  bool next_record(std::vector<std::string>& fields) {
    fields.clear();
    if (at_end()) return false;
    std::string field;
    bool in_quotes = false;
    bool saw_any = false;
    while (pos < text.size()) {
      char ch = text[pos];
      if (in_quotes) {
        if (ch == '"') {
          if (pos + 1 < text.size() && text[pos + 1] == '"') {
            field.push_back('"');
            pos += 2;
          } else {
            in_quotes = false;
            ++pos;
          }
        } else {
          field.push_back(ch);
          ++pos;
        }
        continue;
      }
      if (ch == '"' && field.empty()) {
        in_quotes = true;
        saw_any = true;
        ++pos;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        saw_any = true;
        ++pos;
      } else if (ch == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') {
        pos += 2;
        fields.push_back(std::move(field));
        return true;
      } else if (ch == '\n') {
        ++pos;
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(ch);
        saw_any = true;
        ++pos;
      }
    }
    check(!in_quotes, "unterminated quote in CSV input");
    (void)saw_any;
    fields.push_back(std::move(field));
    return true;
  }
};

[[noreturn]] void parse_fail(const std::string& rel, size_t row, const std::string& col, const std::string& why) {
  fail("CSV parse failure in '" + rel + "' row " + std::to_string(row) + " column '" + col + "': " + why);
}

Relation parse_csv(const std::string& text, const std::string& relation_name,
                   const std::vector<ColumnSpec>& schema) {
  CsvCursor cur{text};
  std::vector<std::string> fields;
  check(cur.next_record(fields), "CSV is empty (header row required)");
  check(fields.size() == schema.size(),
        "CSV header of '" + relation_name + "' has " + std::to_string(fields.size()) +
            " columns, schema declares " + std::to_string(schema.size()));
  for (size_t i = 0; i < schema.size(); ++i) {
    check(fields[i] == schema[i].name,
          "CSV header mismatch in '" + relation_name + "': expected '" + schema[i].name + "', found '" + fields[i] + "'");
  }

  size_t n_cols = schema.size();
  std::vector<Column> cols(n_cols);
  for (size_t i = 0; i < n_cols; ++i) {
    cols[i].name = schema[i].name;
    cols[i].kind = schema[i].kind;
    if (schema[i].kind != ColumnKind::numeric) {
      cols[i].dict = schema[i].dict ? schema[i].dict : std::make_shared<Dictionary>();
    }
  }

  size_t row = 0;
  std::vector<std::pair<size_t, size_t>> nulls;  // (col, row)
  while (cur.next_record(fields)) {
    if (fields.size() != n_cols) {
      fail("CSV row " + std::to_string(row + 1) + " of '" + relation_name + "' has " +
           std::to_string(fields.size()) + " fields, expected " + std::to_string(n_cols));
    }
    for (size_t i = 0; i < n_cols; ++i) {
      const std::string& tok = fields[i];
      Column& c = cols[i];
      if (tok.empty()) {
        if (!schema[i].nullable) parse_fail(relation_name, row + 1, c.name, "empty cell in non-nullable column");
        nulls.emplace_back(i, row);
        if (c.kind == ColumnKind::numeric) {
          c.num.push_back(0.0);
        } else {
          c.codes.push_back(0);
        }
        continue;
      }
      if (c.kind == ColumnKind::numeric) {
        double v = 0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) {
          parse_fail(relation_name, row + 1, c.name, "non-numeric token '" + tok + "'");
        }
        c.num.push_back(v);
      } else {
        c.codes.push_back(c.dict->encode(tok));
      }
    }
    ++row;
  }

  Relation rel(relation_name);
  rel.set_row_count(row);
  for (size_t i = 0; i < n_cols; ++i) rel.add_column(std::move(cols[i]));
  for (auto [ci, ri] : nulls) {
    // add_column moved the columns in order, so names still line up.
    rel.column_mut(schema[ci].name).validity.set_invalid(ri, row);
  }
  return rel;
}

void append_field(std::string& out, const std::string& field) {
  bool needs_quote = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs_quote) {
    out += field;
    return;
  }
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
}

}  // namespace

Relation load_csv(const std::string& path, const std::string& relation_name,
                  const std::vector<ColumnSpec>& schema) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), "cannot open CSV file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  return parse_csv(text, relation_name, schema);
}

Relation load_csv_string(const std::string& text, const std::string& relation_name,
                         const std::vector<ColumnSpec>& schema) {
  return parse_csv(text, relation_name, schema);
}

std::string write_csv_string(const Relation& rel) {
  std::string out;
  for (size_t i = 0; i < rel.column_count(); ++i) {
    if (i) out.push_back(',');
    append_field(out, rel.columns()[i].name);
  }
  out.push_back('\n');
  for (size_t r = 0; r < rel.row_count(); ++r) {
    for (size_t i = 0; i < rel.column_count(); ++i) {
      const Column& c = rel.columns()[i];
      if (i) out.push_back(',');
      if (!c.is_valid(r)) continue;  // null -> empty cell
      if (c.kind == ColumnKind::numeric) {
        out += format_double(c.num[r]);
      } else if (c.dict) {
        append_field(out, c.dict->decode(c.codes[r]));
      } else {
        out += std::to_string(c.codes[r]);
      }
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Relation& rel, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), "cannot open '" + path + "' for writing");
  out << write_csv_string(rel);
  check(out.good(), "failed writing '" + path + "'");
}

}  // namespace factorboost
