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

#include "cloudsvm/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cloudsvm/error.hpp"
#include "cloudsvm/codec.hpp"
#include "cloudsvm/log.hpp"
#include "cloudsvm/risk.hpp"

namespace cloudsvm {

namespace fs = std::filesystem;
using nlohmann::json;

Dataset load_dataset(const DatasetSource& source) {
  std::ifstream in(source.path);
  if (!in) throw Error("cannot open dataset '" + source.path.string() + "'");
  try {
    if (source.format == "libsvm") {
      return parse_libsvm(in, {source.zero_as_negative, false});
    }
    if (source.format == "csv") {
      return parse_csv(in, {source.label_column, source.has_header, source.zero_as_negative});
    }
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), source.path.string() + ": " + e.what());
  }
  throw ConfigError("unknown dataset format '" + source.format + "' (expected libsvm or csv)");
}

Grid default_grid(KernelKind kind) {
  Grid g;
  g.c = {0.01, 0.1, 1.0, 10.0, 100.0};
  g.gamma = kind == KernelKind::linear ? std::vector<double>{1.0}
                                       : std::vector<double>{0.01, 0.1, 1.0, 10.0};
  return g;
}

// ---------------------------------------------------------------------------

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::size_t count_correct(const SvmModel& model, const Dataset& test) {
  std::size_t correct = 0;
  for (const auto& s : test.samples) correct += predict(model, s.features) == s.label ? 1 : 0;
  return correct;
}

}  // namespace

CvResult cross_validate(const Dataset& ds, const CloudTrainConfig& cloud, std::size_t k,
                        std::uint64_t seed, const CvOptions& options) {
  const auto folds = kfold_split(ds, k, seed, options.stratified);
  CvResult cv;
  cv.n = ds.size();
  std::vector<double> accs, iters, svs;
  std::size_t continued_correct = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto [train, params] = scale_features(folds[f].train, options.scaling);
    const Dataset test = params.apply(folds[f].test);

    std::vector<double> test_acc;
    CloudTrainOptions train_options;
    train_options.on_iteration = [&](const IterationStats&, const SvmModel& model) {
      test_acc.push_back(static_cast<double>(count_correct(model, test)) /
                         static_cast<double>(test.size()));
    };
    const auto run = cloud_train(train, cloud, train_options);

    std::unordered_set<SampleId> test_ids;
    for (const auto& s : test.samples) test_ids.insert(s.id);
    for (const auto& part : run.partition_ids) {
      for (const auto id : part) {
        if (test_ids.contains(id)) {
          throw Error("fold " + std::to_string(f + 1) + ": test sample " + std::to_string(id) +
                      " leaked into a training partition");
        }
      }
    }

    FoldResult r;
    r.fold = f + 1;
    r.train_size = train.size();
    r.test_size = test.size();
    r.correct = count_correct(run.model, test);
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.test_size);
    r.iterations = run.trace.size();
    r.sv_count = run.global_svs.size();
    r.model_sv_count = run.model.support_vectors.size();
    r.converged = run.converged;
    r.trace = run.trace;
    r.test_accuracy.assign(test_acc.begin(), test_acc.begin() + static_cast<long>(run.trace.size()));
    r.continuation = run.continuation;
    r.continuation_test_accuracy.assign(test_acc.begin() + static_cast<long>(run.trace.size()),
                                        test_acc.end());
    r.continued_correct = run.continued_model ? count_correct(*run.continued_model, test) : r.correct;

    cv.correct += r.correct;
    continued_correct += r.continued_correct;
    accs.push_back(r.accuracy);
    iters.push_back(static_cast<double>(r.iterations));
    svs.push_back(static_cast<double>(r.sv_count));
    cv.folds.push_back(std::move(r));
  }
  cv.pooled_accuracy = static_cast<double>(cv.correct) / static_cast<double>(cv.n);
  cv.mean_accuracy = mean(accs);
  cv.stddev_accuracy = sample_stddev(accs);
  cv.mean_iterations = mean(iters);
  cv.mean_sv_count = mean(svs);
  if (cloud.extra_iterations > 0) {
    cv.continued_pooled_accuracy =
        static_cast<double>(continued_correct) / static_cast<double>(cv.n);
  }
  return cv;
}

GridResult grid_search(const Dataset& ds, const CloudTrainConfig& cloud, const Grid& grid,
                       std::size_t k, std::uint64_t seed, const CvOptions& options) {
  if (grid.c.empty() || grid.gamma.empty()) throw ConfigError("grid must not be empty");
  std::vector<double> cs = grid.c;
  std::vector<double> gammas = grid.gamma;
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  GridResult result;
  if (cs.size() == 1 && gammas.size() == 1) {
    result.best_c = cs.front();
    result.best_gamma = gammas.front();
    result.table.push_back({cs.front(), gammas.front(), 0.0, 0.0, 0.0, 0.0});
    return result;
  }
  double best = -1.0;
  for (const double c : cs) {
    for (const double gamma : gammas) {
      CloudTrainConfig point = cloud;
      point.train.c = c;
      point.train.kernel.gamma = gamma;
      point.extra_iterations = 0;
      const auto cv = cross_validate(ds, point, k, seed, options);
      result.table.push_back(
          {c, gamma, cv.pooled_accuracy, cv.mean_accuracy, cv.mean_iterations, cv.mean_sv_count});
      if (cv.pooled_accuracy > best) {
        best = cv.pooled_accuracy;
        result.best_c = c;
        result.best_gamma = gamma;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Config schema

namespace {

class SchemaReader {
 public:
  SchemaReader(const json& obj, std::string prefix, std::vector<std::string>& errors,
               std::set<std::string> allowed)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {
    if (!obj_.is_object()) {
      errors_.push_back(name("") + ": expected an object");
      return;
    }
    for (const auto& [key, value] : obj_.items()) {
      if (!allowed.contains(key)) errors_.push_back(name(key) + ": unknown key");
    }
  }

  bool has(const std::string& key) const { return obj_.is_object() && obj_.contains(key); }

  template <typename T>
  void read(const std::string& key, T& out, const std::function<bool(const T&)>& check = {},
            const char* expectation = nullptr) {
    if (!has(key)) return;
    try {
      T value = obj_.at(key).get<T>();
      if (check && !check(value)) {
        errors_.push_back(name(key) + ": " + (expectation ? expectation : "invalid value"));
        return;
      }
      out = std::move(value);
    } catch (const json::exception&) {
      errors_.push_back(name(key) + ": wrong type (" + obj_.at(key).dump() + ")");
    }
  }

  const json& at(const std::string& key) const { return obj_.at(key); }
  std::string name(const std::string& key) const {
    if (key.empty()) return prefix_.empty() ? "<root>" : prefix_;
    return prefix_.empty() ? key : prefix_ + "." + key;
  }
  std::vector<std::string>& errors() { return errors_; }

 private:
  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
};

fs::path resolve(const fs::path& p, const fs::path& base) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

const auto positive_size = [](const std::size_t& v) { return v >= 1; };
const auto non_negative = [](const double& v) { return v >= 0.0 && std::isfinite(v); };
const auto positive = [](const double& v) { return v > 0.0 && std::isfinite(v); };

}  // namespace

ExperimentConfig experiment_config_from_json(const json& j, const fs::path& base_dir) {
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  SchemaReader root(j, "", errors,
                    {"name", "dataset", "cloud", "cv_folds", "stratified_folds", "grid", "seed",
                     "scaling", "output_dir"});
  if (!j.is_object()) throw ConfigError("experiment config: " + errors.front());

  root.read<std::string>("name", cfg.name);
  root.read<std::size_t>("cv_folds", cfg.cv_folds, [](const std::size_t& k) { return k >= 2; },
                         "expected an integer >= 2");
  root.read<bool>("stratified_folds", cfg.stratified_folds);
  root.read<std::uint64_t>("seed", cfg.seed);
  std::string output_dir = cfg.output_dir.string();
  root.read<std::string>("output_dir", output_dir);
  cfg.output_dir = resolve(output_dir, base_dir);
  std::string scaling = "minmax";
  root.read<std::string>(
      "scaling", scaling, [](const std::string& s) { return s == "minmax" || s == "none"; },
      "expected \"minmax\" or \"none\"");
  cfg.scaling = scaling == "none" ? ScalingMode::none : ScalingMode::minmax;

  if (!root.has("dataset")) {
    errors.push_back("dataset: required");
  } else {
    SchemaReader ds(root.at("dataset"), "dataset", errors,
                    {"path", "format", "label_column", "has_header", "zero_as_negative"});
    std::string path;
    ds.read<std::string>("path", path);
    if (path.empty()) errors.push_back("dataset.path: required");
    cfg.dataset.path = resolve(path, base_dir);
    ds.read<std::string>(
        "format", cfg.dataset.format,
        [](const std::string& f) { return f == "libsvm" || f == "csv"; },
        "expected \"libsvm\" or \"csv\"");
    ds.read<std::size_t>("label_column", cfg.dataset.label_column);
    ds.read<bool>("has_header", cfg.dataset.has_header);
    ds.read<bool>("zero_as_negative", cfg.dataset.zero_as_negative);
  }

  if (root.has("cloud")) {
    SchemaReader cl(root.at("cloud"), "cloud", errors,
                    {"l", "kernel", "epsilon", "max_iterations", "stop_rule", "kkt_tol",
                     "sv_threshold", "max_passes", "cache_budget_mb", "partition_strategy",
                     "reshuffle_each_iteration", "dedup_by_content", "extra_iterations",
                     "parallelism"});
    auto& c = cfg.cloud;
    cl.read<std::size_t>("l", c.l, positive_size, "expected an integer >= 1");
    if (cl.has("kernel")) {
      try {
        c.train.kernel = kernel_from_json(cl.at("kernel"));
      } catch (const ConfigError& e) {
        errors.push_back(std::string("cloud.kernel: ") + e.what());
      }
    }
    cl.read<double>("epsilon", c.epsilon, non_negative, "expected a number >= 0");
    cl.read<std::size_t>("max_iterations", c.max_iterations, positive_size,
                         "expected an integer >= 1");
    std::string rule = to_string(c.stop_rule);
    cl.read<std::string>("stop_rule", rule);
    try {
      c.stop_rule = parse_stop_rule(rule);
    } catch (const ConfigError& e) {
      errors.push_back(std::string("cloud.stop_rule: ") + e.what());
    }
    cl.read<double>("kkt_tol", c.train.kkt_tol, positive, "expected a number > 0");
    cl.read<double>("sv_threshold", c.train.sv_threshold, positive, "expected a number > 0");
    if (cl.has("max_passes") && !cl.at("max_passes").is_null()) {
      std::size_t passes = 0;
      cl.read<std::size_t>("max_passes", passes, positive_size, "expected an integer >= 1");
      if (passes) c.train.max_passes = passes;
    }
    std::size_t budget_mb = c.train.cache_budget >> 20;
    cl.read<std::size_t>("cache_budget_mb", budget_mb, positive_size, "expected an integer >= 1");
    c.train.cache_budget = budget_mb << 20;
    std::string strategy = "stratified";
    cl.read<std::string>(
        "partition_strategy", strategy,
        [](const std::string& s) {
          return s == "stratified" || s == "shuffled" || s == "round_robin";
        },
        "expected \"stratified\", \"shuffled\" or \"round_robin\"");
    c.partition_strategy = strategy == "shuffled"      ? PartitionStrategy::shuffled
                           : strategy == "round_robin" ? PartitionStrategy::round_robin
                                                       : PartitionStrategy::stratified;
    cl.read<bool>("reshuffle_each_iteration", c.reshuffle_each_iteration);
    cl.read<bool>("dedup_by_content", c.dedup_by_content);
    cl.read<std::size_t>("extra_iterations", c.extra_iterations);
    cl.read<std::size_t>("parallelism", c.parallelism);
  }

  if (root.has("grid")) {
    SchemaReader g(root.at("grid"), "grid", errors, {"c", "gamma"});
    auto all_positive = [](const std::vector<double>& v) {
      return !v.empty() && std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
    };
    g.read<std::vector<double>>("c", cfg.grid.c, all_positive, "expected a non-empty list of numbers > 0");
    g.read<std::vector<double>>("gamma", cfg.grid.gamma, all_positive,
                                "expected a non-empty list of numbers > 0");
  }
  const Grid defaults = default_grid(cfg.cloud.train.kernel.kind);
  if (cfg.grid.c.empty()) cfg.grid.c = defaults.c;
  if (cfg.grid.gamma.empty()) cfg.grid.gamma = defaults.gamma;
  cfg.cloud.seed = cfg.seed;

  if (!errors.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  if (cfg.cloud.train.kernel.kind == KernelKind::linear &&
      std::any_of(cfg.grid.gamma.begin(), cfg.grid.gamma.end(), [](double g) { return g != 1.0; })) {
    warn("gamma is ignored by the linear kernel");
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) throw ConfigError("'" + path.string() + "' is a directory");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

// ---------------------------------------------------------------------------

namespace {

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

json stats_json(const IterationStats& s, double test_accuracy) {
  return json{{"t", s.t},
              {"risk", s.risk},
              {"accuracy", s.accuracy},
              {"test_accuracy", test_accuracy},
              {"global_sv_count", s.global_sv_count},
              {"per_node_sv_counts", s.per_node_sv_counts}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string trace_rows(const std::vector<IterationStats>& trace,
                       const std::vector<double>& test_acc, bool continued) {
  // Reuse the trainer layout, appending test accuracy and a continuation flag.
  std::istringstream base(trace_csv(trace));
  std::string line;
  std::getline(base, line);  // header
  std::string out;
  for (std::size_t i = 0; std::getline(base, line); ++i) {
    out += line + ',' + num(i < test_acc.size() ? test_acc[i] : 0.0) + ',' +
           (continued ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const Dataset ds = load_dataset(cfg.dataset);
  const CvOptions options{cfg.scaling, cfg.stratified_folds};

  ExperimentReport report;
  report.name = cfg.name;
  report.n = ds.size();
  report.dim = ds.dim;
  report.grid = grid_search(ds, cfg.cloud, cfg.grid, cfg.cv_folds, cfg.seed, options);

  CloudTrainConfig best = cfg.cloud;
  best.train.c = report.grid.best_c;
  best.train.kernel.gamma = report.grid.best_gamma;
  report.cv = cross_validate(ds, best, cfg.cv_folds, cfg.seed, options);
  if (report.grid.table.size() == 1) {
    auto& only = report.grid.table.front();
    only.pooled_accuracy = report.cv.pooled_accuracy;
    only.mean_accuracy = report.cv.mean_accuracy;
    only.mean_iterations = report.cv.mean_iterations;
    only.mean_sv_count = report.cv.mean_sv_count;
  }

  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error("cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());

  const auto [pos, neg] = class_counts(ds);
  json grid_rows = json::array();
  for (const auto& p : report.grid.table) {
    grid_rows.push_back({{"c", p.c},
                         {"gamma", p.gamma},
                         {"pooled_accuracy", p.pooled_accuracy},
                         {"mean_accuracy", p.mean_accuracy},
                         {"mean_iterations", p.mean_iterations},
                         {"mean_sv_count", p.mean_sv_count}});
  }
  json folds = json::array();
  std::string folds_csv =
      "fold,train_size,test_size,correct,accuracy,iterations,sv_count,model_sv_count,converged\n";
  for (const auto& f : report.cv.folds) {
    json trace = json::array();
    for (std::size_t i = 0; i < f.trace.size(); ++i) trace.push_back(stats_json(f.trace[i], f.test_accuracy[i]));
    json continuation = json::array();
    for (std::size_t i = 0; i < f.continuation.size(); ++i) {
      continuation.push_back(stats_json(f.continuation[i], f.continuation_test_accuracy[i]));
    }
    folds.push_back({{"fold", f.fold},
                     {"train_size", f.train_size},
                     {"test_size", f.test_size},
                     {"correct", f.correct},
                     {"accuracy", f.accuracy},
                     {"iterations", f.iterations},
                     {"sv_count", f.sv_count},
                     {"model_sv_count", f.model_sv_count},
                     {"converged", f.converged},
                     {"trace", std::move(trace)},
                     {"continuation", std::move(continuation)}});
    folds_csv += std::to_string(f.fold) + ',' + std::to_string(f.train_size) + ',' +
                 std::to_string(f.test_size) + ',' + std::to_string(f.correct) + ',' +
                 num(f.accuracy) + ',' + std::to_string(f.iterations) + ',' +
                 std::to_string(f.sv_count) + ',' + std::to_string(f.model_sv_count) + ',' +
                 (f.converged ? "1" : "0") + '\n';
  }

  const auto& k = best.train.kernel;
  json doc{{"name", cfg.name},
           {"dataset",
            {{"path", cfg.dataset.path.filename().string()},
             {"format", cfg.dataset.format},
             {"n", ds.size()},
             {"dim", ds.dim},
             {"positives", pos},
             {"negatives", neg}}},
           {"config",
            {{"l", best.l},
             {"kernel", kernel_to_json(k)},
             {"epsilon", best.epsilon},
             {"max_iterations", best.max_iterations},
             {"stop_rule", to_string(best.stop_rule)},
             {"kkt_tol", best.train.kkt_tol},
             {"sv_threshold", best.train.sv_threshold},
             {"extra_iterations", best.extra_iterations},
             {"cv_folds", cfg.cv_folds},
             {"stratified_folds", cfg.stratified_folds},
             {"scaling", cfg.scaling == ScalingMode::minmax ? "minmax" : "none"},
             {"seed", cfg.seed}}},
           {"grid", std::move(grid_rows)},
           {"best", {{"c", report.grid.best_c}, {"gamma", report.grid.best_gamma}}},
           {"pooled_accuracy", report.cv.pooled_accuracy},
           {"mean_accuracy", report.cv.mean_accuracy},
           {"stddev_accuracy", report.cv.stddev_accuracy},
           {"mean_iterations", report.cv.mean_iterations},
           {"mean_sv_count", report.cv.mean_sv_count},
           {"folds", std::move(folds)}};
  if (report.cv.continued_pooled_accuracy) {
    doc["continued_pooled_accuracy"] = *report.cv.continued_pooled_accuracy;
  }

  const fs::path report_path = cfg.output_dir / "report.json";
  write_file(report_path, doc.dump(2) + "\n");
  report.artifacts.push_back(report_path);
  const fs::path folds_path = cfg.output_dir / "folds.csv";
  write_file(folds_path, folds_csv);
  report.artifacts.push_back(folds_path);
  for (const auto& f : report.cv.folds) {
    std::string csv =
        "t,risk,accuracy,global_sv_count,per_node_sv_counts,test_accuracy,continued\n";
    csv += trace_rows(f.trace, f.test_accuracy, false);
    csv += trace_rows(f.continuation, f.continuation_test_accuracy, true);
    const fs::path p = cfg.output_dir / ("trace_fold" + std::to_string(f.fold) + ".csv");
    write_file(p, csv);
    report.artifacts.push_back(p);
  }
  return report;
}

}  // namespace cloudsvm
