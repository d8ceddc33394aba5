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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cloudsvm/error.hpp"
#include "cloudsvm/experiment.hpp"
#include "cloudsvm/log.hpp"

using namespace cloudsvm;
namespace fs = std::filesystem;

namespace {

Sample point(SampleId id, double x, double y, int label) {
  SparseVector f;
  if (x != 0.0) f.push_back({1, x});
  if (y != 0.0) f.push_back({2, y});
  return {id, f, label};
}

Dataset blobs(std::uint64_t seed, std::size_t n, double gap) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<Sample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 ? 1 : -1;
    samples.push_back(point(i, label * gap + noise(rng), label * gap + noise(rng), label));
  }
  return make_dataset(std::move(samples));
}

// Four clusters with XOR labels.
Dataset xor_clusters(std::uint64_t seed, std::size_t per_cluster) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.15);
  std::vector<Sample> samples;
  SampleId id = 0;
  for (std::size_t i = 0; i < per_cluster; ++i) {
    for (int cx : {-1, 1}) {
      for (int cy : {-1, 1}) {
        samples.push_back(point(id++, cx + noise(rng), cy + noise(rng), cx * cy));
      }
    }
  }
  return make_dataset(std::move(samples));
}

CloudTrainConfig small_cloud(std::size_t l) {
  CloudTrainConfig cfg;
  cfg.l = l;
  cfg.parallelism = 2;
  return cfg;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cloudsvm-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cross validation fold arithmetic") {
  const Dataset ds = make_dataset(
      {point(0, 1, 0, 1), point(1, 2, 0, 1), point(2, -1, 0, -1), point(3, -2, 0, -1)});
  const CvResult cv = cross_validate(ds, small_cloud(1), 2, 0);
  REQUIRE(cv.folds.size() == 2);
  for (const auto& f : cv.folds) {
    CHECK(f.train_size == 2);
    CHECK(f.test_size == 2);
  }
  CHECK(cv.n == 4);
}

TEST_CASE("separable toy set is classified perfectly on every fold") {
  const Dataset ds = blobs(1, 100, 1.5);
  const CvResult cv = cross_validate(ds, small_cloud(3), 5, 7);
  CHECK(cv.pooled_accuracy == 1.0);
  for (const auto& f : cv.folds) {
    CHECK(f.accuracy == 1.0);
    CHECK(f.converged);
    CHECK(f.test_accuracy.size() == f.trace.size());
  }
  CHECK(cv.stddev_accuracy == 0.0);
}

TEST_CASE("aggregates are recomputable from folds") {
  const Dataset ds = blobs(2, 90, 0.3);
  CloudTrainConfig cloud = small_cloud(3);
  cloud.extra_iterations = 2;
  const CvResult cv = cross_validate(ds, cloud, 3, 1);
  std::size_t correct = 0, continued = 0;
  double iters = 0, svs = 0, acc = 0;
  for (const auto& f : cv.folds) {
    correct += f.correct;
    continued += f.continued_correct;
    iters += f.iterations;
    svs += f.sv_count;
    acc += f.accuracy;
    CHECK(f.continuation.size() == 2);
    CHECK(f.continuation_test_accuracy.size() == 2);
  }
  CHECK(cv.correct == correct);
  CHECK(cv.pooled_accuracy == static_cast<double>(correct) / 90.0);
  CHECK(cv.mean_iterations == doctest::Approx(iters / 3));
  CHECK(cv.mean_sv_count == doctest::Approx(svs / 3));
  CHECK(cv.mean_accuracy == doctest::Approx(acc / 3));
  REQUIRE(cv.continued_pooled_accuracy);
  CHECK(*cv.continued_pooled_accuracy == static_cast<double>(continued) / 90.0);
}

TEST_CASE("grid search picks the separating point") {
  const Dataset ds = xor_clusters(3, 10);
  CloudTrainConfig cloud = small_cloud(2);
  cloud.train.kernel = {KernelKind::rbf, 1.0, 3, 0.0};
  const GridResult g = grid_search(ds, cloud, {{10.0}, {0.001, 2.0}}, 4, 1);
  CHECK(g.best_gamma == 2.0);
  REQUIRE(g.table.size() == 2);
  CHECK(g.table[1].pooled_accuracy == 1.0);
  CHECK(g.table[0].pooled_accuracy < 1.0);
}

TEST_CASE("grid search ties go to the smaller C") {
  const Dataset ds = blobs(4, 60, 1.5);
  const GridResult g = grid_search(ds, small_cloud(2), {{10.0, 1.0}, {1.0}}, 3, 1);
  CHECK(g.table[0].pooled_accuracy == g.table[1].pooled_accuracy);
  CHECK(g.best_c == 1.0);
  CHECK(g.table[0].c == 1.0);

  const GridResult single = grid_search(ds, small_cloud(2), {{0.5}, {1.0}}, 3, 1);
  CHECK(single.best_c == 0.5);
  CHECK(single.table.size() == 1);
  CHECK_THROWS_AS(grid_search(ds, small_cloud(2), {{}, {1.0}}, 3, 1), ConfigError);
}

TEST_CASE("default grid") {
  CHECK(default_grid(KernelKind::linear).gamma == std::vector<double>{1.0});
  CHECK(default_grid(KernelKind::rbf).gamma.size() == 4);
  CHECK(default_grid(KernelKind::linear).c.size() == 5);
}

TEST_CASE("config parsing") {
  const auto j = nlohmann::json::parse(R"({
    "name": "toy",
    "dataset": {"path": "data/toy.libsvm"},
    "cloud": {"l": 3, "kernel": {"kind": "rbf", "gamma": 0.5}, "extra_iterations": 2,
              "stop_rule": "risk_delta", "partition_strategy": "shuffled"},
    "cv_folds": 5,
    "grid": {"c": [1, 10]},
    "seed": 9,
    "scaling": "none",
    "output_dir": "out/toy"
  })");
  const ExperimentConfig cfg = experiment_config_from_json(j, "/base");
  CHECK(cfg.name == "toy");
  CHECK(cfg.dataset.path == fs::path("/base/data/toy.libsvm"));
  CHECK(cfg.output_dir == fs::path("/base/out/toy"));
  CHECK(cfg.cloud.l == 3);
  CHECK(cfg.cloud.train.kernel.kind == KernelKind::rbf);
  CHECK(cfg.cloud.stop_rule == StopRule::risk_delta);
  CHECK(cfg.cloud.partition_strategy == PartitionStrategy::shuffled);
  CHECK(cfg.cloud.extra_iterations == 2);
  CHECK(cfg.cloud.seed == 9);
  CHECK(cfg.cv_folds == 5);
  CHECK(cfg.grid.c == std::vector<double>{1, 10});
  CHECK(cfg.grid.gamma == default_grid(KernelKind::rbf).gamma);
  CHECK(cfg.scaling == ScalingMode::none);
}

TEST_CASE("config schema errors list every offending field") {
  const auto j = nlohmann::json::parse(R"({
    "dataset": {"path": "x", "format": "xml"},
    "cloud": {"l": 0, "bogus": 1},
    "cv_folds": 1,
    "colour": "red"
  })");
  try {
    experiment_config_from_json(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dataset.format") != std::string::npos);
    CHECK(msg.find("cloud.l") != std::string::npos);
    CHECK(msg.find("cloud.bogus") != std::string::npos);
    CHECK(msg.find("cv_folds") != std::string::npos);
    CHECK(msg.find("colour") != std::string::npos);
  }
  CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json::parse("{}")), ConfigError);
  CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json::parse("[]")), ConfigError);
  CHECK_THROWS_AS(
      experiment_config_from_json(nlohmann::json::parse(
          R"({"dataset": {"path": "x"}, "cloud": {"kernel": {"kind": "rbf", "gamma": -1}}})")),
      ConfigError);
}

TEST_CASE("config files") {
  const fs::path dir = temp_dir("config");
  CHECK_THROWS_AS(load_experiment_config(dir), ConfigError);
  CHECK_THROWS_AS(load_experiment_config(dir / "missing.json"), ConfigError);
  std::ofstream(dir / "broken.json") << "{";
  CHECK_THROWS_AS(load_experiment_config(dir / "broken.json"), ConfigError);
  std::ofstream(dir / "ok.json") << R"({"dataset": {"path": "d.libsvm"}})";
  CHECK(load_experiment_config(dir / "ok.json").dataset.path == dir / "d.libsvm");
}

TEST_CASE("load_dataset reports the path") {
  DatasetSource src;
  src.path = "/nonexistent/cloudsvm.libsvm";
  try {
    load_dataset(src);
    FAIL("expected Error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/cloudsvm.libsvm") != std::string::npos);
  }
}

TEST_CASE("run_experiment writes reproducible artifacts") {
  const fs::path dir = temp_dir("experiment");
  std::ofstream(dir / "toy.libsvm") << serialize_libsvm(blobs(5, 80, 0.6));
  ExperimentConfig cfg;
  cfg.dataset.path = dir / "toy.libsvm";
  cfg.cloud = small_cloud(2);
  cfg.cloud.extra_iterations = 1;
  cfg.cv_folds = 4;
  cfg.grid = {{0.1, 1.0}, {1.0}};
  cfg.output_dir = dir / "a";
  const ExperimentReport a = run_experiment(cfg);
  cfg.output_dir = dir / "b";
  const ExperimentReport b = run_experiment(cfg);

  REQUIRE(a.artifacts.size() == 2 + 4);
  for (std::size_t i = 0; i < a.artifacts.size(); ++i) {
    CHECK(fs::exists(a.artifacts[i]));
    CHECK(a.artifacts[i].filename() == b.artifacts[i].filename());
    CHECK(slurp(a.artifacts[i]) == slurp(b.artifacts[i]));
  }
  CHECK(fs::exists(dir / "a" / "report.json"));
  CHECK(fs::exists(dir / "a" / "folds.csv"));
  CHECK(fs::exists(dir / "a" / "trace_fold1.csv"));
  const auto report = nlohmann::json::parse(slurp(dir / "a" / "report.json"));
  CHECK(report["pooled_accuracy"].get<double>() == a.cv.pooled_accuracy);
  CHECK(report["folds"].size() == 4);
  CHECK(report.contains("continued_pooled_accuracy"));
}
