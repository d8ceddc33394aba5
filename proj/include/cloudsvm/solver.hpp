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

// Soft-margin SVM training by SMO on the dual problem
//
//   min F(a) = 1/2 a'Qa - 1'a   s.t.  0 <= a <= C,  y'a = 0,
//
// using maximal-violating-pair working-set selection, plus the decision
// function of the trained model.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cloudsvm/dataset.hpp"
#include "cloudsvm/error.hpp"
#include "cloudsvm/kernel.hpp"

namespace cloudsvm {

struct TrainConfig {
  double c = 1.0;
  KernelSpec kernel;
  double kkt_tol = 1e-3;
  double sv_threshold = 1e-8;
  // Full passes allowed before giving up; an SMO step count of
  // max_passes * n. Unset means 10 * n passes.
  std::optional<std::size_t> max_passes;
  std::size_t cache_budget = std::size_t{256} << 20;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Throws ConfigError.
void validate(const TrainConfig& cfg);

struct SvmModel {
  std::vector<Sample> support_vectors;
  std::vector<double> dual_coefs;  // alpha_i * y_i, parallel to support_vectors
  double bias = 0.0;
  KernelSpec kernel;
  FeatureIndex dim = 0;
  // Dense w for the linear kernel, w[k] is feature k+1.
  std::optional<std::vector<double>> linear_weights;
};

struct SolveDiagnostics {
  double dual_objective = 0.0;
  std::size_t iterations = 0;
  double max_kkt_violation = 0.0;
};

class ConvergenceError : public TrainingError {
 public:
  ConvergenceError(const std::string& what, SolveDiagnostics best)
      : TrainingError(what), diagnostics_(best) {}
  const SolveDiagnostics& diagnostics() const noexcept { return diagnostics_; }

 private:
  SolveDiagnostics diagnostics_;
};

// Raw solution of the dual, indexed like the input samples.
struct DualSolution {
  std::vector<double> alpha;
  std::vector<double> gradient;  // Q alpha - 1
  double bias = 0.0;
  SolveDiagnostics diagnostics;
};

// Called after every SMO step with the step number (1-based) and the dual
// objective F(alpha).
using StepObserver = std::function<void(std::size_t step, double objective)>;

DualSolution solve_dual(const QRowCache& q, std::span<const int> labels, const TrainConfig& cfg,
                        const StepObserver& observer = {});

struct TrainResult {
  SvmModel model;
  SolveDiagnostics diagnostics;
  std::vector<double> alpha;  // parallel to the training samples
};

// Throws TrainingError for a single-class or too-small dataset and
// ConvergenceError when the pass budget runs out.
TrainResult train(const Dataset& ds, const TrainConfig& cfg, const StepObserver& observer = {});

// sum_i coef_i K(sv_i, x) + b
double decision(const SvmModel& model, const SparseVector& x);
// Same value through linear_weights; requires them.
double decision_linear(const SvmModel& model, const SparseVector& x);
// Ties (decision exactly 0) go to +1.
int predict(const SvmModel& model, const SparseVector& x);
int label_of(double decision_value);

// 1/2 a'Qa - sum(a). Throws ArgumentError on a size mismatch.
double dual_objective(std::span<const double> alphas, const QMatrix& q);

// Largest KKT violation, max(0, max_{I_up} -y G - min_{I_low} -y G); 0 when
// either set is empty.
double kkt_max_violation(std::span<const double> alpha, std::span<const double> gradient,
                         std::span<const int> labels, double c);

}  // namespace cloudsvm
