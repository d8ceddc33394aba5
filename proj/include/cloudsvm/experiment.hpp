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

// Cross-validation, grid search and the end-to-end experiment runner that
// writes report.json, folds.csv and per-fold iteration traces.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cloudsvm/dataset.hpp"
#include "cloudsvm/trainer.hpp"
#include "json.hpp"

namespace cloudsvm {

struct DatasetSource {
  std::filesystem::path path;
  std::string format = "libsvm";  // libsvm | csv
  std::size_t label_column = 0;   // csv only
  bool has_header = false;        // csv only
  bool zero_as_negative = false;
};

// Throws Error naming the path when the file cannot be read.
Dataset load_dataset(const DatasetSource& source);

struct Grid {
  std::vector<double> c;
  std::vector<double> gamma;
};

// C in {0.01, 0.1, 1, 10, 100}; gamma {1} for linear, {0.01, 0.1, 1, 10}
// otherwise.
Grid default_grid(KernelKind kind);

struct CvOptions {
  ScalingMode scaling = ScalingMode::minmax;
  bool stratified = true;
};

struct FoldResult {
  std::size_t fold = 0;  // 1-based
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  std::size_t iterations = 0;
  std::size_t sv_count = 0;        // |V| at the final iteration
  std::size_t model_sv_count = 0;  // support vectors of the final hypothesis
  bool converged = false;
  std::vector<IterationStats> trace;
  std::vector<double> test_accuracy;  // per iteration of `trace`
  std::vector<IterationStats> continuation;
  std::vector<double> continuation_test_accuracy;
  std::size_t continued_correct = 0;  // after the continuation rounds
};

struct CvResult {
  std::vector<FoldResult> folds;
  std::size_t n = 0;
  std::size_t correct = 0;
  double pooled_accuracy = 0.0;  // total correct / n
  double mean_accuracy = 0.0;
  double stddev_accuracy = 0.0;  // sample standard deviation over folds
  double mean_iterations = 0.0;
  double mean_sv_count = 0.0;
  // Pooled accuracy of the hypotheses after the continuation rounds; set
  // when cloud.extra_iterations > 0.
  std::optional<double> continued_pooled_accuracy;
};

// k CloudSVM runs, each on k-1 folds (scaling fitted on those folds) and
// evaluated on the held-out fold.
CvResult cross_validate(const Dataset& ds, const CloudTrainConfig& cloud, std::size_t k,
                        std::uint64_t seed, const CvOptions& options = {});

struct GridPoint {
  double c = 0.0;
  double gamma = 0.0;
  double pooled_accuracy = 0.0;
  double mean_accuracy = 0.0;
  double mean_iterations = 0.0;
  double mean_sv_count = 0.0;
};

struct GridResult {
  double best_c = 0.0;
  double best_gamma = 0.0;
  std::vector<GridPoint> table;  // sorted by (C, gamma)
};

// Highest pooled accuracy wins; ties go to the smaller C, then smaller gamma.
GridResult grid_search(const Dataset& ds, const CloudTrainConfig& cloud, const Grid& grid,
                       std::size_t k, std::uint64_t seed, const CvOptions& options = {});

struct ExperimentConfig {
  std::string name = "experiment";
  DatasetSource dataset;
  CloudTrainConfig cloud;
  std::size_t cv_folds = 10;
  bool stratified_folds = true;
  Grid grid;
  std::uint64_t seed = 1;
  ScalingMode scaling = ScalingMode::minmax;
  std::filesystem::path output_dir = "out";
};

// Validates against the documented schema; relative paths are resolved
// against `base_dir`. Throws ConfigError listing every offending field.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ExperimentReport {
  std::string name;
  std::size_t n = 0;
  FeatureIndex dim = 0;
  GridResult grid;
  CvResult cv;
  std::vector<std::filesystem::path> artifacts;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

}  // namespace cloudsvm
