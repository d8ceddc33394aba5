// Copyright 2026 The CloudSVM Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cloudsvm/executor.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iterator>
#include <map>
#include <thread>

namespace cloudsvm {
namespace {

std::string describe(const std::exception_ptr& error) {
  try {
    std::rethrow_exception(error);
  } catch (const std::exception& e) {
    return e.what();
  } catch (...) {
    return "unknown exception";
  }
}

// Runs task(0..count-1) on up to `workers` threads. Once a task throws, tasks
// that have not started are skipped. Returns per-task exceptions.
template <typename Task>
std::vector<std::exception_ptr> run_tasks(std::size_t count, std::size_t workers, Task&& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> cancelled{false};
  auto worker = [&] {
    while (!cancelled.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
        cancelled.store(true);
      }
    }
  };
  workers = std::min(workers, count);
  if (workers <= 1) {
    worker();
    return errors;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return errors;
}

const std::exception_ptr* first_error(const std::vector<std::exception_ptr>& errors,
                                      std::size_t& index) {
  for (index = 0; index < errors.size(); ++index) {
    if (errors[index]) return &errors[index];
  }
  return nullptr;
}

}  // namespace

std::string to_string(JobPhase phase) { return phase == JobPhase::map ? "map" : "reduce"; }

JobError::JobError(JobPhase phase, std::string key, std::string cause)
    : Error(to_string(phase) + " task for key '" + key + "' failed: " + cause),
      phase_(phase),
      key_(std::move(key)),
      cause_(std::move(cause)) {}

std::vector<std::pair<std::string, std::vector<std::string>>> group_by_key(
    const std::vector<KeyedRecord>& records) {
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& r : records) groups[r.key].push_back(r.value);
  return {std::make_move_iterator(groups.begin()), std::make_move_iterator(groups.end())};
}

std::vector<KeyedRecord> run_job(const std::vector<KeyedRecord>& inputs, const JobSpec& job) {
  if (!job.map || !job.reduce) throw ArgumentError("job needs both a map and a reduce function");
  const std::size_t workers = job.parallelism != 0 ? job.parallelism : std::max<std::size_t>(inputs.size(), 1);

  std::vector<std::vector<KeyedRecord>> mapped(inputs.size());
  auto map_errors = run_tasks(inputs.size(), workers, [&](std::size_t i) {
    auto out = job.map(inputs[i]);
    for (const auto& r : out) {
      if (r.key.empty()) throw ArgumentError("map emitted a record with an empty key");
    }
    mapped[i] = std::move(out);
  });
  std::size_t failed = 0;
  if (const auto* e = first_error(map_errors, failed)) {
    throw JobError(JobPhase::map, inputs[failed].key, describe(*e));
  }

  std::vector<KeyedRecord> intermediate;
  for (auto& part : mapped) {
    std::move(part.begin(), part.end(), std::back_inserter(intermediate));
  }
  const auto groups = group_by_key(intermediate);

  std::vector<std::vector<KeyedRecord>> reduced(groups.size());
  auto reduce_errors = run_tasks(groups.size(), workers, [&](std::size_t g) {
    auto out = job.reduce(groups[g].first, groups[g].second);
    for (const auto& r : out) {
      if (r.key.empty()) throw ArgumentError("reduce emitted a record with an empty key");
    }
    reduced[g] = std::move(out);
  });
  if (const auto* e = first_error(reduce_errors, failed)) {
    throw JobError(JobPhase::reduce, groups[failed].first, describe(*e));
  }

  std::vector<KeyedRecord> output;
  for (auto& part : reduced) std::move(part.begin(), part.end(), std::back_inserter(output));
  std::stable_sort(output.begin(), output.end(),
                   [](const KeyedRecord& a, const KeyedRecord& b) { return a.key < b.key; });
  return output;
}

}  // namespace cloudsvm
