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
#include "factorboost/relation.hpp"

#include <cstring>

namespace factorboost {

uint64_t relation_checksum(const Relation& rel, const std::string& skip_column) {
  uint64_t h = hash_str(rel.name());
  h = hash_combine(h, rel.row_count());
  for (const Column& c : rel.columns()) {
    if (c.name == skip_column) continue;
    h = hash_combine(h, hash_str(c.name));
    if (c.kind == ColumnKind::numeric) {
      h = hash_combine(h, fnv1a64(c.num.data(), c.num.size() * sizeof(double)));
    } else {
      h = hash_combine(h, fnv1a64(c.codes.data(), c.codes.size() * sizeof(uint32_t)));
    }
    for (size_t i = 0; i < rel.row_count(); ++i) {
      if (!c.is_valid(i)) h = hash_combine(h, i);
    }
  }
  return h;
}

}  // namespace factorboost
