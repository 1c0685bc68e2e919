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
#include "factorboost/predicates.hpp"

#include <algorithm>

namespace factorboost {

std::string SplitPredicate::to_string() const {
  std::string s = attr.qualified();
  if (op == PredicateOp::le) {
    s += negated ? " > " : " <= ";
    s += format_double(value);
  } else {
    s += negated ? " != " : " == ";
    s += std::to_string(code);
  }
  if (include_nulls) s += " (or null)";
  return s;
}

std::vector<uint32_t> select_rows(const Relation& rel, const std::string& rel_name,
                                  const PredicateList& preds) {
  std::vector<const SplitPredicate*> mine;
  for (const SplitPredicate& p : preds) {
    if (p.attr.relation == rel_name) mine.push_back(&p);
  }
  std::vector<uint32_t> out;
  out.reserve(rel.row_count());
  if (mine.empty()) {
    for (size_t r = 0; r < rel.row_count(); ++r) out.push_back(static_cast<uint32_t>(r));
    return out;
  }
  std::vector<const Column*> cols;
  for (const SplitPredicate* p : mine) cols.push_back(&rel.column(p->attr.column));
  for (size_t r = 0; r < rel.row_count(); ++r) {
    bool pass = true;
    for (size_t i = 0; i < mine.size(); ++i) {
      if (!mine[i]->matches(*cols[i], r)) {
        pass = false;
        break;
      }
    }
    if (pass) out.push_back(static_cast<uint32_t>(r));
  }
  return out;
}

bool relation_has_predicates(const std::string& rel_name, const PredicateList& preds) {
  for (const SplitPredicate& p : preds) {
    if (p.attr.relation == rel_name) return true;
  }
  return false;
}

uint64_t relation_predicate_digest(const std::string& rel_name, const PredicateList& preds) {
  std::vector<uint64_t> digests;
  for (const SplitPredicate& p : preds) {
    if (p.attr.relation == rel_name) digests.push_back(p.digest());
  }
  std::sort(digests.begin(), digests.end());
  uint64_t h = 0x9d2c5680aull;
  for (uint64_t d : digests) h = hash_combine(h, d);
  return h;
}

}  // namespace factorboost
