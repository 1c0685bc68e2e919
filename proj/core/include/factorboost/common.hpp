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
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace factorboost {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void check(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

// 64-bit FNV-1a, used for predicate digests and cache keys.
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t hash_u64(uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_combine(uint64_t a, uint64_t b) { return hash_u64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2))); }

inline uint64_t hash_str(std::string_view s, uint64_t seed = 0xcbf29ce484222325ULL) {
  return fnv1a64(s.data(), s.size(), seed);
}

// Formats a double with 17 significant digits (exact round trip).
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Counters used by the no-materialization checks: every operator that
// produces an intermediate result reports its row count here.
class ExecStats {
 public:
  static ExecStats& global() {
    static ExecStats s;
    return s;
  }

  void note_intermediate(uint64_t rows) {
    total_rows_.fetch_add(rows, std::memory_order_relaxed);
    uint64_t prev = peak_rows_.load(std::memory_order_relaxed);
    while (rows > prev && !peak_rows_.compare_exchange_weak(prev, rows, std::memory_order_relaxed)) {
    }
  }

  void reset() {
    peak_rows_.store(0);
    total_rows_.store(0);
  }

  uint64_t peak_rows() const { return peak_rows_.load(); }
  uint64_t total_rows() const { return total_rows_.load(); }

 private:
  std::atomic<uint64_t> peak_rows_{0};
  std::atomic<uint64_t> total_rows_{0};
};

}  // namespace factorboost
