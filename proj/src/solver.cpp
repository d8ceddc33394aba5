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

#include "cloudsvm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cloudsvm {
namespace {

constexpr double kTau = 1e-12;  // curvature floor for non-PSD pairs

bool in_up(double alpha, int y, double c) { return y > 0 ? alpha < c : alpha > 0.0; }
bool in_low(double alpha, int y, double c) { return y > 0 ? alpha > 0.0 : alpha < c; }

double objective_from_gradient(std::span<const double> alpha, std::span<const double> gradient) {
  double sum = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) sum += alpha[i] * (gradient[i] - 1.0);
  return 0.5 * sum;
}

// Bias from the free multipliers; midpoint of the feasible interval when all
// sit at a bound.
double compute_bias(std::span<const double> alpha, std::span<const double> gradient,
                    std::span<const int> labels, double c) {
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double yg = labels[i] * gradient[i];
    if (alpha[i] >= c) {
      if (labels[i] < 0) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else if (alpha[i] <= 0.0) {
      if (labels[i] > 0) {
        ub = std::min(ub, yg);
      } else {
        lb = std::max(lb, yg);
      }
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double r = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  return -r;
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.c > 0.0) || !std::isfinite(cfg.c)) throw ConfigError("C must be positive");
  if (!(cfg.kkt_tol > 0.0)) throw ConfigError("kkt_tol must be positive");
  if (!(cfg.sv_threshold > 0.0) || !(cfg.sv_threshold < cfg.c)) {
    throw ConfigError("sv_threshold must lie in (0, C)");
  }
  if (cfg.max_passes && *cfg.max_passes == 0) throw ConfigError("max_passes must be positive");
  validate(cfg.kernel);
}

double kkt_max_violation(std::span<const double> alpha, std::span<const double> gradient,
                         std::span<const int> labels, double c) {
  double up = -std::numeric_limits<double>::infinity();
  double low = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    const double v = -labels[t] * gradient[t];
    if (in_up(alpha[t], labels[t], c)) up = std::max(up, v);
    if (in_low(alpha[t], labels[t], c)) low = std::min(low, v);
  }
  if (!std::isfinite(up) || !std::isfinite(low)) return 0.0;
  return std::max(0.0, up - low);
}

DualSolution solve_dual(const QRowCache& q, std::span<const int> labels, const TrainConfig& cfg,
                        const StepObserver& observer) {
  const std::size_t n = q.size();
  if (labels.size() != n) throw ArgumentError("label count does not match the Q matrix");
  const double c = cfg.c;
  const auto& diag = q.diagonal();

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  sol.gradient.assign(n, -1.0);
  auto& alpha = sol.alpha;
  auto& grad = sol.gradient;

  const std::size_t passes = cfg.max_passes.value_or(10 * std::max<std::size_t>(n, 1));
  const std::size_t max_steps = passes * std::max<std::size_t>(n, 1);

  std::size_t step = 0;
  double gap = 0.0;
  while (true) {
    // Maximal violating pair; strict comparisons keep the lowest index on ties.
    std::size_t i = n;
    std::size_t j = n;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -labels[t] * grad[t];
      if (in_up(alpha[t], labels[t], c) && v > g_max) {
        g_max = v;
        i = t;
      }
      if (in_low(alpha[t], labels[t], c) && v < g_min) {
        g_min = v;
        j = t;
      }
    }
    gap = (i == n || j == n) ? 0.0 : std::max(0.0, g_max - g_min);
    if (gap <= cfg.kkt_tol) break;
    if (step >= max_steps) {
      SolveDiagnostics best{objective_from_gradient(alpha, grad), step, gap};
      throw ConvergenceError("SMO did not reach KKT tolerance " + std::to_string(cfg.kkt_tol) +
                                 " within " + std::to_string(max_steps) +
                                 " steps (violation " + std::to_string(gap) + ")",
                             best);
    }

    const auto row_i = q.row(i);
    const auto row_j = q.row(j);
    const auto& qi = *row_i;
    const auto& qj = *row_j;
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];

    if (labels[i] != labels[j]) {
      double quad = diag[i] + diag[j] + 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = diag[i] + diag[j] - 2.0 * qi[j];
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double d_ai = alpha[i] - old_ai;
    const double d_aj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += qi[t] * d_ai + qj[t] * d_aj;
    ++step;
    if (observer) observer(step, objective_from_gradient(alpha, grad));
  }

  sol.bias = compute_bias(alpha, grad, labels, c);
  sol.diagnostics = {objective_from_gradient(alpha, grad), step, gap};
  return sol;
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg, const StepObserver& observer) {
  validate(cfg);
  if (ds.size() < 2) throw TrainingError("training needs at least 2 samples");
  const auto [pos, neg] = class_counts(ds);
  if (pos == 0 || neg == 0) {
    throw TrainingError("training set has a single class (" + std::to_string(ds.size()) +
                        " samples labeled " + (pos ? "+1" : "-1") + ")");
  }
  std::vector<int> labels;
  labels.reserve(ds.size());
  for (const auto& s : ds.samples) labels.push_back(s.label);

  const QRowCache q(cfg.kernel, ds.samples, std::max(cfg.cache_budget, ds.size() * sizeof(double)));
  DualSolution sol = solve_dual(q, labels, cfg, observer);

  TrainResult result;
  SvmModel& model = result.model;
  model.kernel = cfg.kernel;
  model.bias = sol.bias;
  model.dim = ds.dim;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (sol.alpha[i] > cfg.sv_threshold) {
      model.support_vectors.push_back(ds.samples[i]);
      model.dual_coefs.push_back(sol.alpha[i] * labels[i]);
    }
  }
  if (cfg.kernel.kind == KernelKind::linear) {
    std::vector<double> w(ds.dim, 0.0);
    for (std::size_t k = 0; k < model.support_vectors.size(); ++k) {
      for (const auto& f : model.support_vectors[k].features) {
        w[f.index - 1] += model.dual_coefs[k] * f.value;
      }
    }
    model.linear_weights = std::move(w);
  }
  result.diagnostics = sol.diagnostics;
  result.alpha = std::move(sol.alpha);
  return result;
}

double decision(const SvmModel& model, const SparseVector& x) {
  double sum = 0.0;
  if (model.kernel.kind == KernelKind::rbf) {
    const double x_norm2 = squared_norm(x);
    for (std::size_t k = 0; k < model.support_vectors.size(); ++k) {
      const auto& sv = model.support_vectors[k].features;
      sum += model.dual_coefs[k] * kernel_value(model.kernel, sv, squared_norm(sv), x, x_norm2);
    }
  } else {
    for (std::size_t k = 0; k < model.support_vectors.size(); ++k) {
      sum += model.dual_coefs[k] * kernel_value(model.kernel, model.support_vectors[k].features, x);
    }
  }
  return sum + model.bias;
}

double decision_linear(const SvmModel& model, const SparseVector& x) {
  if (!model.linear_weights) throw ArgumentError("model has no linear weights");
  const auto& w = *model.linear_weights;
  double sum = 0.0;
  for (const auto& f : x) {
    if (f.index <= w.size()) sum += w[f.index - 1] * f.value;
  }
  return sum + model.bias;
}

int label_of(double decision_value) { return decision_value >= 0.0 ? 1 : -1; }

int predict(const SvmModel& model, const SparseVector& x) { return label_of(decision(model, x)); }

double dual_objective(std::span<const double> alphas, const QMatrix& q) {
  if (q.rows != q.cols || alphas.size() != q.rows) {
    throw ArgumentError("alpha length " + std::to_string(alphas.size()) +
                        " does not match Q of size " + std::to_string(q.rows) + "x" +
                        std::to_string(q.cols));
  }
  double quad = 0.0;
  double lin = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < alphas.size(); ++j) row += q(i, j) * alphas[j];
    quad += alphas[i] * row;
    lin += alphas[i];
  }
  return 0.5 * quad - lin;
}

}  // namespace cloudsvm
