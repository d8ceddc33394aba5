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

// Distributed training by support-vector exchange.
//
// The training set is split once into L partitions. Every iteration t runs a
// MapReduce job: map merges a partition with the global support-vector set
// V^{t-1}; reduce trains an SVM on the merged set and emits its support
// vectors. The union of V^{t-1} and all emitted vectors becomes V^t, and the
// global hypothesis h^t is an SVM trained on V^t. Training stops when the
// empirical risk of h^t stops moving (within epsilon) or V^t stops growing.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cloudsvm/dataset.hpp"
#include "cloudsvm/error.hpp"
#include "cloudsvm/solver.hpp"

namespace cloudsvm {

// Support vectors keyed by sample id. With content deduplication enabled, a
// sample whose (label, features) equal an existing member is also a
// duplicate, which matters only when ids come from unrelated sources.
class GlobalSvSet {
 public:
  GlobalSvSet() = default;
  explicit GlobalSvSet(bool dedup_by_content) : dedup_by_content_(dedup_by_content) {}

  // True when the sample was not yet present.
  bool insert(const Sample& sample);
  bool contains(const Sample& sample) const;

  std::size_t size() const noexcept { return by_id_.size(); }
  bool empty() const noexcept { return by_id_.empty(); }
  bool dedup_by_content() const noexcept { return dedup_by_content_; }

  // In id order.
  std::vector<Sample> samples() const;
  std::vector<SampleId> ids() const;

 private:
  std::map<SampleId, Sample> by_id_;
  std::set<std::string> contents_;
  bool dedup_by_content_ = false;
};

enum class StopRule { risk_delta, sv_set_fixed_point, either };

std::string to_string(StopRule rule);
StopRule parse_stop_rule(const std::string& text);

struct CloudTrainConfig {
  std::size_t l = 10;
  TrainConfig train;
  double epsilon = 1e-6;
  std::size_t max_iterations = 50;
  std::uint64_t seed = 0;
  StopRule stop_rule = StopRule::either;
  PartitionStrategy partition_strategy = PartitionStrategy::stratified;
  bool reshuffle_each_iteration = false;
  bool dedup_by_content = false;
  // Map/reduce worker threads; 0 means one per partition.
  std::size_t parallelism = 0;
  // Rounds to keep running after convergence, recorded separately.
  std::size_t extra_iterations = 0;
};

void validate(const CloudTrainConfig& cfg);

struct IterationStats {
  std::size_t t = 0;
  double risk = 0.0;
  double accuracy = 0.0;
  std::size_t global_sv_count = 0;
  std::vector<std::size_t> per_node_sv_counts;
  std::vector<SampleId> global_sv_ids;  // sorted
};

// Training failure on one node.
class NodeError : public TrainingError {
 public:
  NodeError(std::size_t iteration, std::size_t partition, const std::string& cause);
  std::size_t iteration() const noexcept { return iteration_; }
  std::size_t partition() const noexcept { return partition_; }

 private:
  std::size_t iteration_;
  std::size_t partition_;
};

// Partition samples (id order) followed by members of v not already in the
// partition (id order).
Dataset map_phase(const Partition& p, const GlobalSvSet& v);

struct NodeResult {
  std::vector<Sample> svs;
  SvmModel model;
};

NodeResult reduce_phase(const Dataset& merged, const TrainConfig& cfg);

GlobalSvSet merge_svs(GlobalSvSet v, const std::vector<std::vector<Sample>>& contributions);

// SVM trained on the members of v. Throws TrainingError when v is empty or
// single-class.
SvmModel global_hypothesis(const GlobalSvSet& v, const TrainConfig& cfg, FeatureIndex dim = 0);

bool has_converged(const IterationStats& prev, const IterationStats& curr,
                   const CloudTrainConfig& cfg);

using IterationObserver = std::function<void(const IterationStats&, const SvmModel&)>;

struct CloudTrainOptions {
  // Set on which risk and accuracy of h^t are measured; the training set when
  // null.
  const Dataset* evaluation = nullptr;
  // Called for every recorded iteration, continuation rounds included.
  IterationObserver on_iteration;
};

struct CloudTrainResult {
  SvmModel model;  // h^t at the last iteration of `trace`
  std::vector<IterationStats> trace;
  bool converged = false;
  GlobalSvSet global_svs;
  // Sample ids of each partition, as used in the first iteration.
  std::vector<std::vector<SampleId>> partition_ids;
  // Rounds run past convergence (empty unless extra_iterations > 0).
  std::vector<IterationStats> continuation;
  std::optional<SvmModel> continued_model;
};

CloudTrainResult cloud_train(const Dataset& ds, const CloudTrainConfig& cfg,
                             const CloudTrainOptions& options = {});

// `t,risk,accuracy,global_sv_count,per_node_sv_counts` with the counts as a
// quoted JSON array.
std::string trace_csv(const std::vector<IterationStats>& trace);

}  // namespace cloudsvm
