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

#include "cloudsvm/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "cloudsvm/executor.hpp"
#include "cloudsvm/codec.hpp"
#include "cloudsvm/risk.hpp"

namespace cloudsvm {

bool GlobalSvSet::insert(const Sample& sample) {
  if (contains(sample)) return false;
  by_id_.emplace(sample.id, sample);
  if (dedup_by_content_) contents_.insert(to_libsvm_line(sample));
  return true;
}

bool GlobalSvSet::contains(const Sample& sample) const {
  if (by_id_.contains(sample.id)) return true;
  return dedup_by_content_ && contents_.contains(to_libsvm_line(sample));
}

std::vector<Sample> GlobalSvSet::samples() const {
  std::vector<Sample> out;
  out.reserve(by_id_.size());
  for (const auto& [id, s] : by_id_) out.push_back(s);
  return out;
}

std::vector<SampleId> GlobalSvSet::ids() const {
  std::vector<SampleId> out;
  out.reserve(by_id_.size());
  for (const auto& [id, s] : by_id_) out.push_back(id);
  return out;
}

std::string to_string(StopRule rule) {
  switch (rule) {
    case StopRule::risk_delta:
      return "risk_delta";
    case StopRule::sv_set_fixed_point:
      return "sv_set_fixed_point";
    case StopRule::either:
      return "either";
  }
  return "?";
}

StopRule parse_stop_rule(const std::string& text) {
  if (text == "risk_delta") return StopRule::risk_delta;
  if (text == "sv_set_fixed_point") return StopRule::sv_set_fixed_point;
  if (text == "either") return StopRule::either;
  throw ConfigError("unknown stop rule '" + text +
                    "' (expected risk_delta, sv_set_fixed_point or either)");
}

void validate(const CloudTrainConfig& cfg) {
  if (cfg.l < 1) throw ConfigError("partition count L must be >= 1");
  if (!(cfg.epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  validate(cfg.train);
}

NodeError::NodeError(std::size_t iteration, std::size_t partition, const std::string& cause)
    : TrainingError("iteration " + std::to_string(iteration) + ", partition " +
                    std::to_string(partition) + ": " + cause),
      iteration_(iteration),
      partition_(partition) {}

Dataset map_phase(const Partition& p, const GlobalSvSet& v) {
  std::vector<Sample> merged = p.data.samples;
  std::sort(merged.begin(), merged.end(),
            [](const Sample& a, const Sample& b) { return a.id < b.id; });
  GlobalSvSet seen(v.dedup_by_content());
  for (const auto& s : merged) seen.insert(s);
  for (const auto& s : v.samples()) {
    if (seen.insert(s)) merged.push_back(s);
  }
  Dataset out;
  out.samples = std::move(merged);
  for (const auto& s : out.samples) {
    if (!s.features.empty()) out.dim = std::max(out.dim, s.features.back().index);
  }
  out.dim = std::max(out.dim, p.data.dim);
  return out;
}

NodeResult reduce_phase(const Dataset& merged, const TrainConfig& cfg) {
  auto trained = train(merged, cfg);
  NodeResult out;
  out.svs = trained.model.support_vectors;
  out.model = std::move(trained.model);
  return out;
}

GlobalSvSet merge_svs(GlobalSvSet v, const std::vector<std::vector<Sample>>& contributions) {
  for (const auto& svs : contributions) {
    for (const auto& s : svs) v.insert(s);
  }
  return v;
}

SvmModel global_hypothesis(const GlobalSvSet& v, const TrainConfig& cfg, FeatureIndex dim) {
  if (v.empty()) throw TrainingError("global support-vector set is empty");
  Dataset ds;
  ds.samples = v.samples();
  for (const auto& s : ds.samples) {
    if (!s.features.empty()) ds.dim = std::max(ds.dim, s.features.back().index);
  }
  ds.dim = std::max(ds.dim, dim);
  return train(ds, cfg).model;
}

bool has_converged(const IterationStats& prev, const IterationStats& curr,
                   const CloudTrainConfig& cfg) {
  const bool risk_flat = std::abs(curr.risk - prev.risk) <= cfg.epsilon;
  const bool fixed_point = curr.global_sv_ids == prev.global_sv_ids;
  switch (cfg.stop_rule) {
    case StopRule::risk_delta:
      return risk_flat;
    case StopRule::sv_set_fixed_point:
      return fixed_point;
    case StopRule::either:
      return risk_flat || fixed_point;
  }
  return false;
}

// ---------------------------------------------------------------------------

namespace {

std::string node_key(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "node-%06zu", index);
  return buf;
}

std::size_t node_index(const std::string& key) {
  std::size_t index = 0;
  const auto* first = key.data() + 5;
  std::from_chars(first, key.data() + key.size(), index);
  return index;
}

struct CloudState {
  std::size_t t = 0;
  GlobalSvSet v;
  std::optional<SvmModel> model;
  IterationStats stats;
};

}  // namespace

CloudTrainResult cloud_train(const Dataset& ds, const CloudTrainConfig& cfg,
                             const CloudTrainOptions& options) {
  validate(cfg);
  const auto [pos, neg] = class_counts(ds);
  if (pos == 0 || neg == 0) throw TrainingError("training set has a single class");
  const Dataset& evaluation = options.evaluation ? *options.evaluation : ds;
  const FeatureIndex dim = ds.dim;

  CloudTrainResult result;
  const auto initial_parts = partition(ds, cfg.l, cfg.seed, cfg.partition_strategy);
  for (const auto& p : initial_parts) {
    std::vector<SampleId> ids;
    for (const auto& s : p.data.samples) ids.push_back(s.id);
    result.partition_ids.push_back(std::move(ids));
  }

  auto partitions_for = [&](std::size_t t) {
    if (!cfg.reshuffle_each_iteration || t <= 1) return initial_parts;
    return partition(ds, cfg.l, cfg.seed + t - 1, cfg.partition_strategy);
  };

  RoundDriver<CloudState> driver;
  driver.build = [&](const CloudState& state) {
    std::vector<KeyedRecord> inputs;
    for (const auto& p : partitions_for(state.t + 1)) {
      inputs.push_back({node_key(p.index), encode_samples(p.data.samples)});
    }
    // The global set travels to every mapper in serialized form.
    const auto global_payload = encode_samples(state.v.samples());
    const bool by_content = cfg.dedup_by_content;
    JobSpec job;
    job.parallelism = cfg.parallelism;
    job.map = [global_payload, by_content, dim](const KeyedRecord& in) {
      Partition p;
      p.index = node_index(in.key);
      p.data.samples = decode_samples(in.value);
      p.data.dim = dim;
      GlobalSvSet v(by_content);
      for (const auto& s : decode_samples(global_payload)) v.insert(s);
      const Dataset merged = map_phase(p, v);
      return std::vector<KeyedRecord>{{in.key, encode_samples(merged.samples)}};
    };
    const TrainConfig train_cfg = cfg.train;
    job.reduce = [train_cfg, dim](const std::string& key, const std::vector<std::string>& values) {
      std::vector<KeyedRecord> out;
      for (const auto& value : values) {
        Dataset merged;
        merged.samples = decode_samples(value);
        merged.dim = dim;
        const auto node = reduce_phase(merged, train_cfg);
        out.push_back({key, encode_samples(node.svs)});
      }
      return out;
    };
    return std::pair{std::move(inputs), std::move(job)};
  };

  driver.fold = [&](const CloudState& state, std::vector<KeyedRecord> outputs) {
    CloudState next;
    next.t = state.t + 1;
    std::vector<std::vector<Sample>> contributions;
    contributions.reserve(outputs.size());
    for (const auto& rec : outputs) contributions.push_back(decode_samples(rec.value));
    next.v = merge_svs(state.v, contributions);
    next.model = global_hypothesis(next.v, cfg.train, dim);
    const auto report = evaluate(*next.model, evaluation);
    next.stats.t = next.t;
    next.stats.risk = report.empirical_risk;
    next.stats.accuracy = report.accuracy;
    next.stats.global_sv_count = next.v.size();
    for (const auto& c : contributions) next.stats.per_node_sv_counts.push_back(c.size());
    next.stats.global_sv_ids = next.v.ids();
    if (options.on_iteration) options.on_iteration(next.stats, *next.model);
    return next;
  };

  driver.stop = [&](const CloudState& prev, const CloudState& curr) {
    return prev.t >= 1 && has_converged(prev.stats, curr.stats, cfg);
  };

  std::vector<IterationStats> trace;
  auto record = [&trace](const CloudState& s) {
    trace.push_back(s.stats);
    return "t=" + std::to_string(s.t) + " svs=" + std::to_string(s.v.size());
  };
  driver.summarize = record;

  auto run = [&](CloudState start, std::size_t rounds) {
    const std::size_t t0 = start.t;
    try {
      return run_rounds(std::move(start), driver, rounds);
    } catch (const RoundError& e) {
      std::size_t part = 0;
      if (e.key().rfind("node-", 0) == 0) part = node_index(e.key());
      throw NodeError(t0 + e.round(), part, e.cause());
    }
  };

  auto main_run = run(CloudState{}, cfg.max_iterations);
  result.trace = std::move(trace);
  result.converged = main_run.converged;
  result.model = std::move(*main_run.state.model);
  result.global_svs = main_run.state.v;

  if (result.converged && cfg.extra_iterations > 0) {
    trace.clear();
    main_run.state.model = result.model;
    driver.stop = [](const CloudState&, const CloudState&) { return false; };
    auto extra = run(std::move(main_run.state), cfg.extra_iterations);
    result.continuation = std::move(trace);
    result.continued_model = std::move(extra.state.model);
  }
  return result;
}

std::string trace_csv(const std::vector<IterationStats>& trace) {
  auto number = [](double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
  };
  std::string out = "t,risk,accuracy,global_sv_count,per_node_sv_counts\n";
  for (const auto& s : trace) {
    std::string counts = "[";
    for (std::size_t i = 0; i < s.per_node_sv_counts.size(); ++i) {
      if (i) counts += ',';
      counts += std::to_string(s.per_node_sv_counts[i]);
    }
    counts += ']';
    out += std::to_string(s.t) + ',' + number(s.risk) + ',' + number(s.accuracy) + ',' +
           std::to_string(s.global_sv_count) + ",\"" + counts + "\"\n";
  }
  return out;
}

}  // namespace cloudsvm
