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
#include <functional>
#include <string>
#include <vector>

namespace factorboost {

enum class TaskKind { message, split_eval, absorb, residual_update, sample, generic };

struct TaskNode {
  uint64_t id = 0;
  TaskKind kind = TaskKind::generic;
  std::function<void()> fn;
  std::vector<uint64_t> deps;
  std::string label;
};

// Dependency-aware execution over a bounded worker pool. Every task runs
// exactly once after all of its dependencies; ready tasks dispatch FIFO. Any
// failure cancels tasks that have not started and rethrows the first error
// after the pool drains. Tasks must be pure (or write disjoint state), so
// results are identical to a workers=1 run.
void execute_dag(std::vector<TaskNode> tasks, int workers);

// Instrumentation for the exclusive-writer contract: reader tasks bump the
// gauge while running; residual_update tasks assert it is zero.
class ReaderGauge {
 public:
  void enter() { active_.fetch_add(1, std::memory_order_acq_rel); }
  void leave() { active_.fetch_sub(1, std::memory_order_acq_rel); }
  int active() const { return active_.load(std::memory_order_acquire); }

  void note_violation_if_active() {
    if (active() != 0) violations_.fetch_add(1, std::memory_order_relaxed);
  }
  uint64_t violations() const { return violations_.load(); }

 private:
  std::atomic<int> active_{0};
  std::atomic<uint64_t> violations_{0};
};

int default_workers();

}  // namespace factorboost
