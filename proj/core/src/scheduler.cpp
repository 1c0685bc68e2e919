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
#include "factorboost/scheduler.hpp"

#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "factorboost/common.hpp"

namespace factorboost {

int default_workers() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void execute_dag(std::vector<TaskNode> tasks, int workers) {
  check(workers >= 1, "execute_dag requires at least one worker");

  std::map<uint64_t, size_t> index;
  for (size_t i = 0; i < tasks.size(); ++i) {
    check(index.emplace(tasks[i].id, i).second, "duplicate task id " + std::to_string(tasks[i].id));
  }
  std::vector<int> indegree(tasks.size(), 0);
  std::vector<std::vector<size_t>> dependents(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) {
    for (uint64_t dep : tasks[i].deps) {
      auto it = index.find(dep);
      check(it != index.end(),
            "task " + std::to_string(tasks[i].id) + " depends on unknown task " + std::to_string(dep));
      dependents[it->second].push_back(i);
      ++indegree[i];
    }
  }

  // Kahn pass for cycle detection before any task runs.
  {
    std::vector<int> deg = indegree;
    std::deque<size_t> q;
    for (size_t i = 0; i < tasks.size(); ++i) {
      if (deg[i] == 0) q.push_back(i);
    }
    size_t seen = 0;
    while (!q.empty()) {
      size_t cur = q.front();
      q.pop_front();
      ++seen;
      for (size_t d : dependents[cur]) {
        if (--deg[d] == 0) q.push_back(d);
      }
    }
    if (seen != tasks.size()) {
      std::string cyc;
      for (size_t i = 0; i < tasks.size(); ++i) {
        if (deg[i] > 0) cyc += (cyc.empty() ? "" : ", ") + std::to_string(tasks[i].id);
      }
      fail("task dependency cycle among: " + cyc);
    }
  }

  std::mutex mu;
  std::condition_variable cv;
  std::deque<size_t> ready;
  size_t remaining = tasks.size();
  bool failed = false;
  std::exception_ptr first_error;

  for (size_t i = 0; i < tasks.size(); ++i) {
    if (indegree[i] == 0) ready.push_back(i);  // submission order
  }

  auto worker = [&]() {
    std::unique_lock<std::mutex> lock(mu);
    for (;;) {
      cv.wait(lock, [&]() { return failed || remaining == 0 || !ready.empty(); });
      if (failed || remaining == 0) return;
      size_t cur = ready.front();
      ready.pop_front();
      lock.unlock();
      std::exception_ptr err;
      try {
        if (tasks[cur].fn) tasks[cur].fn();
      } catch (...) {
        err = std::current_exception();
      }
      lock.lock();
      if (err) {
        if (!failed) {
          failed = true;
          first_error = err;
        }
        cv.notify_all();
        return;
      }
      --remaining;
      for (size_t d : dependents[cur]) {
        if (--indegree[d] == 0) ready.push_back(d);
      }
      if (remaining == 0 || !ready.empty()) cv.notify_all();
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed) std::rethrow_exception(first_error);
  check(remaining == 0, "scheduler drained with pending tasks");
}

}  // namespace factorboost
