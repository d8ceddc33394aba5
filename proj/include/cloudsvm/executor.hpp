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

// In-process MapReduce: parallel map over keyed records, a key-grouped
// shuffle, parallel reduce per key, and a driver for iterated jobs.
//
// Output of run_job is a pure function of the inputs and the job: within a
// key, shuffled values keep (input position, emission order), and the final
// records are ordered by key with reduce emission order preserved for equal
// keys. The worker count never changes the result.

#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cloudsvm/error.hpp"

namespace cloudsvm {

struct KeyedRecord {
  std::string key;  // non-empty
  std::string value;

  friend bool operator==(const KeyedRecord&, const KeyedRecord&) = default;
};

using MapFn = std::function<std::vector<KeyedRecord>(const KeyedRecord& input)>;
using ReduceFn = std::function<std::vector<KeyedRecord>(const std::string& key,
                                                        const std::vector<std::string>& values)>;

struct JobSpec {
  MapFn map;
  ReduceFn reduce;
  // Worker threads; 0 means one per input record.
  std::size_t parallelism = 0;
};

enum class JobPhase { map, reduce };

std::string to_string(JobPhase phase);

// A failing map or reduce call. Remaining tasks are cancelled.
class JobError : public Error {
 public:
  JobError(JobPhase phase, std::string key, std::string cause);

  JobPhase phase() const noexcept { return phase_; }
  const std::string& key() const noexcept { return key_; }
  const std::string& cause() const noexcept { return cause_; }

 private:
  JobPhase phase_;
  std::string key_;
  std::string cause_;
};

std::vector<KeyedRecord> run_job(const std::vector<KeyedRecord>& inputs, const JobSpec& job);

// Groups records by key (ordered), keeping arrival order inside each group.
std::vector<std::pair<std::string, std::vector<std::string>>> group_by_key(
    const std::vector<KeyedRecord>& records);

// ---------------------------------------------------------------------------
// Iterated jobs

template <typename State>
struct RoundDriver {
  // Inputs and job for the next round, from the current state.
  std::function<std::pair<std::vector<KeyedRecord>, JobSpec>(const State&)> build;
  // Next state from the current one and the job output.
  std::function<State(const State&, std::vector<KeyedRecord>)> fold;
  // Checked after every round with the previous and the new state.
  std::function<bool(const State& prev, const State& curr)> stop;
  // One-line description of a state for the round trace.
  std::function<std::string(const State&)> summarize;
};

template <typename State>
struct RoundsResult {
  State state;
  std::vector<std::string> trace;  // one summary per completed round
  bool converged = false;          // false when max_rounds ran out
};

// A job failure inside run_rounds; carries the trace of completed rounds.
class RoundError : public JobError {
 public:
  RoundError(const JobError& cause, std::size_t round, std::vector<std::string> trace)
      : JobError(cause), round_(round), trace_(std::move(trace)) {}

  std::size_t round() const noexcept { return round_; }  // 1-based, the failing one
  const std::vector<std::string>& trace() const noexcept { return trace_; }

 private:
  std::size_t round_;
  std::vector<std::string> trace_;
};

template <typename State>
RoundsResult<State> run_rounds(State initial, const RoundDriver<State>& driver,
                               std::size_t max_rounds) {
  if (max_rounds < 1) throw ArgumentError("max_rounds must be >= 1");
  RoundsResult<State> result{std::move(initial), {}, false};
  for (std::size_t round = 1; round <= max_rounds; ++round) {
    auto [inputs, job] = driver.build(result.state);
    std::vector<KeyedRecord> outputs;
    try {
      outputs = run_job(inputs, job);
    } catch (const JobError& e) {
      throw RoundError(e, round, result.trace);
    }
    State next = driver.fold(result.state, std::move(outputs));
    result.trace.push_back(driver.summarize ? driver.summarize(next) : std::string{});
    const bool done = driver.stop(result.state, next);
    result.state = std::move(next);
    if (done) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace cloudsvm
