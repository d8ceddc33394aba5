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

#include "cloudsvm/cli.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "cloudsvm/error.hpp"
#include "cloudsvm/experiment.hpp"
#include "cloudsvm/codec.hpp"
#include "cloudsvm/risk.hpp"
#include "cloudsvm/trainer.hpp"

namespace cloudsvm {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for flag combinations CLI11 cannot express; maps to exit code 1.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content)) throw Error("cannot write '" + path.string() + "'");
}

struct DataFlags {
  std::string path;
  std::string format = "libsvm";
  std::size_t label_column = 0;
  bool has_header = false;
  bool zero_as_negative = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--data", path, "Input dataset")->required();
    cmd.add_option("--format", format, "Dataset format")
        ->check(CLI::IsMember({"libsvm", "csv"}))
        ->capture_default_str();
    cmd.add_option("--label-column", label_column, "0-based label column (csv)");
    cmd.add_flag("--has-header", has_header, "First csv row is a header");
    cmd.add_flag("--zero-as-negative", zero_as_negative, "Map label 0 to -1");
  }

  Dataset load(bool allow_unlabeled = false) const {
    if (!fs::exists(path)) throw Error("data file '" + path + "' does not exist");
    std::ifstream in(path);
    if (!in) throw Error("cannot open data file '" + path + "'");
    try {
      if (format == "csv") return parse_csv(in, {label_column, has_header, zero_as_negative});
      return parse_libsvm(in, {zero_as_negative, allow_unlabeled});
    } catch (const ParseError& e) {
      throw Error(path + ": " + e.what());
    }
  }
};

struct TrainFlags {
  DataFlags data;
  std::size_t l = 10;
  double c = 1.0;
  std::string kernel = "linear";
  std::uint64_t seed = 0;
  std::string out;
  std::size_t parallelism = std::max(1u, std::thread::hardware_concurrency());
  double epsilon = 1e-6;
  std::size_t max_iterations = 50;
  std::string stop_rule = "either";
  double kkt_tol = 1e-3;
  double sv_threshold = 1e-8;
  std::string scale = "none";
  std::string strategy = "stratified";
  bool reshuffle = false;
};

struct PredictFlags {
  DataFlags data;
  std::string model;
};

int cmd_train(const TrainFlags& f, std::ostream& out) {
  CloudTrainConfig cfg;
  cfg.l = f.l;
  cfg.train.c = f.c;
  try {
    cfg.train.kernel = parse_kernel_spec(f.kernel);
    cfg.stop_rule = parse_stop_rule(f.stop_rule);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  cfg.train.kkt_tol = f.kkt_tol;
  cfg.train.sv_threshold = f.sv_threshold;
  cfg.epsilon = f.epsilon;
  cfg.max_iterations = f.max_iterations;
  cfg.seed = f.seed;
  cfg.parallelism = f.parallelism;
  cfg.reshuffle_each_iteration = f.reshuffle;
  cfg.partition_strategy = f.strategy == "shuffled"      ? PartitionStrategy::shuffled
                           : f.strategy == "round_robin" ? PartitionStrategy::round_robin
                                                         : PartitionStrategy::stratified;
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }

  const Dataset raw = f.data.load();
  const auto [ds, scaling] =
      scale_features(raw, f.scale == "minmax" ? ScalingMode::minmax : ScalingMode::none);

  const auto started = std::chrono::steady_clock::now();
  CloudTrainOptions options;
  options.on_iteration = [&out](const IterationStats& s, const SvmModel&) {
    out << "t=" << s.t << " risk=" << num(s.risk) << " acc=" << num(s.accuracy)
        << " svs=" << s.global_sv_count << '\n';
  };
  const auto result = cloud_train(ds, cfg, options);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const fs::path dir = f.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  const fs::path model_path = dir / "model.json";
  const fs::path trace_path = dir / "trace.csv";
  const fs::path manifest_path = dir / "manifest.json";
  write_file(model_path, model_to_json(result.model, scaling));
  write_file(trace_path, trace_csv(result.trace));
  const json manifest{{"data", f.data.path},
                      {"format", f.data.format},
                      {"n", ds.size()},
                      {"dim", ds.dim},
                      {"config",
                       {{"l", cfg.l},
                        {"c", cfg.train.c},
                        {"kernel", kernel_to_json(cfg.train.kernel)},
                        {"epsilon", cfg.epsilon},
                        {"max_iterations", cfg.max_iterations},
                        {"stop_rule", to_string(cfg.stop_rule)},
                        {"kkt_tol", cfg.train.kkt_tol},
                        {"sv_threshold", cfg.train.sv_threshold},
                        {"partition_strategy", f.strategy},
                        {"reshuffle_each_iteration", cfg.reshuffle_each_iteration},
                        {"scale", f.scale}}},
                      {"seed", cfg.seed},
                      {"converged", result.converged},
                      {"iterations", result.trace.size()},
                      {"global_sv_count", result.global_svs.size()},
                      {"wall_time_seconds", wall}};
  write_file(manifest_path, manifest.dump(2) + "\n");
  out << (result.converged ? "converged" : "not converged") << " after " << result.trace.size()
      << " iterations\n";
  out << "model: " << model_path.string() << '\n';
  out << "trace: " << trace_path.string() << '\n';
  out << "manifest: " << manifest_path.string() << '\n';
  return kExitOk;
}

int cmd_predict(const PredictFlags& f, std::ostream& out, std::ostream& err) {
  const auto file = model_from_json(read_file(f.model));
  const Dataset raw = f.data.load(true);
  const Dataset ds = file.scaling.apply(raw);
  if (ds.dim > file.model.dim) {
    throw Error("data has " + std::to_string(ds.dim) + " features but the model was trained on " +
                std::to_string(file.model.dim));
  }
  std::size_t correct = 0;
  for (const auto& s : ds.samples) {
    const double d = decision(file.model, s.features);
    const int label = label_of(d);
    correct += label == s.label ? 1 : 0;
    out << s.id << ',' << (label > 0 ? "+1" : "-1") << ',' << num(d) << '\n';
  }
  if (ds.labeled && !ds.empty()) {
    err << "accuracy=" << num(static_cast<double>(correct) / static_cast<double>(ds.size()))
        << " (" << correct << '/' << ds.size() << ")\n";
  }
  return kExitOk;
}

int cmd_experiment(const std::string& config_path, std::size_t parallelism, std::ostream& out) {
  ExperimentConfig cfg;
  try {
    cfg = load_experiment_config(config_path);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  if (parallelism != 0) cfg.cloud.parallelism = parallelism;
  const auto report = run_experiment(cfg);
  for (const auto& p : report.artifacts) out << "wrote " << p.string() << '\n';
  out << "accuracy=" << num(report.cv.pooled_accuracy)
      << " iterations=" << num(report.cv.mean_iterations)
      << " svs=" << num(report.cv.mean_sv_count) << '\n';
  return kExitOk;
}

int cmd_inspect(const std::string& model_path, const DataFlags& data, std::ostream& out) {
  if (!model_path.empty()) {
    const auto file = model_from_json(read_file(model_path));
    const auto& m = file.model;
    std::size_t pos = 0;
    for (const double c : m.dual_coefs) pos += c > 0 ? 1 : 0;
    out << "kernel=" << format_kernel_spec(m.kernel) << " dim=" << m.dim
        << " svs=" << m.support_vectors.size() << " (+1: " << pos
        << ", -1: " << m.support_vectors.size() - pos << ") bias=" << num(m.bias)
        << " scaling=" << (file.scaling.mode() == ScalingMode::minmax ? "minmax" : "none") << '\n';
  }
  if (!data.path.empty()) {
    const Dataset ds = data.load(true);
    const auto [pos, neg] = class_counts(ds);
    out << "samples=" << ds.size() << " dim=" << ds.dim;
    if (ds.labeled) out << " positives=" << pos << " negatives=" << neg;
    out << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed SVM training by support-vector exchange", "cloudsvm"};
  app.require_subcommand(1);

  TrainFlags train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on partitioned data");
  train.data.add_to(*train_cmd);
  train_cmd->add_option("--l", train.l, "Partition count L")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--c", train.c, "Box constraint C")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--kernel", train.kernel, "linear | rbf:gamma=<v> | poly:degree=<d>,gamma=<v>,coef0=<v>")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Seed for partitioning")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Output directory")->required();
  train_cmd->add_option("--parallelism", train.parallelism, "Worker threads")->check(CLI::PositiveNumber);
  train_cmd->add_option("--epsilon", train.epsilon, "Risk-equality tolerance")->check(CLI::NonNegativeNumber)->capture_default_str();
  train_cmd->add_option("--max-iterations", train.max_iterations, "Iteration cap")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--stop-rule", train.stop_rule, "risk_delta | sv_set_fixed_point | either")
      ->check(CLI::IsMember({"risk_delta", "sv_set_fixed_point", "either"}))
      ->capture_default_str();
  train_cmd->add_option("--kkt-tol", train.kkt_tol, "SMO KKT tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--sv-threshold", train.sv_threshold, "Support-vector cutoff on alpha")->check(CLI::PositiveNumber)->capture_default_str();
  train_cmd->add_option("--scale", train.scale, "Feature scaling")
      ->check(CLI::IsMember({"none", "minmax"}))
      ->capture_default_str();
  train_cmd->add_option("--partition-strategy", train.strategy, "Partition assignment")
      ->check(CLI::IsMember({"stratified", "shuffled", "round_robin"}))
      ->capture_default_str();
  train_cmd->add_flag("--reshuffle-each-iteration", train.reshuffle, "Repartition every iteration");

  PredictFlags predict_flags;
  auto* predict_cmd = app.add_subcommand("predict", "Apply a model to a dataset");
  predict_flags.data.add_to(*predict_cmd);
  predict_cmd->add_option("--model", predict_flags.model, "Model JSON")->required();

  std::string config_path;
  std::size_t experiment_parallelism = 0;
  auto* experiment_cmd = app.add_subcommand("experiment", "Run a cross-validation experiment");
  experiment_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
  experiment_cmd->add_option("--parallelism", experiment_parallelism, "Worker threads")
      ->check(CLI::PositiveNumber);

  std::string inspect_model;
  DataFlags inspect_data;
  auto* inspect_cmd = app.add_subcommand("inspect", "Summarize a model or dataset");
  inspect_cmd->add_option("--model", inspect_model, "Model JSON");
  inspect_cmd->add_option("--data", inspect_data.path, "Dataset");
  inspect_cmd->add_option("--format", inspect_data.format, "Dataset format")
      ->check(CLI::IsMember({"libsvm", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*predict_cmd) return cmd_predict(predict_flags, out, err);
    if (*experiment_cmd) return cmd_experiment(config_path, experiment_parallelism, out);
    if (*inspect_cmd) {
      if (inspect_model.empty() && inspect_data.path.empty()) {
        throw UsageError("inspect needs --model or --data");
      }
      return cmd_inspect(inspect_model, inspect_data, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace cloudsvm
