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

// Test-only reference implementations. Nothing here calls into the kernel or
// solver modules, so they can check those modules independently.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "cloudsvm/dataset.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline std::vector<double> densify(const cloudsvm::Sample& s, std::size_t dim) {
  std::vector<double> x(dim, 0.0);
  for (const auto& f : s.features) x[f.index - 1] = f.value;
  return x;
}

enum class Kind { linear, rbf };

inline double kernel(Kind kind, double gamma, const std::vector<double>& a,
                     const std::vector<double>& b) {
  double dot = 0.0, dist = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    dist += (a[k] - b[k]) * (a[k] - b[k]);
  }
  return kind == Kind::linear ? dot : std::exp(-gamma * dist);
}

inline Dense q_matrix(const cloudsvm::Dataset& ds, Kind kind, double gamma) {
  const std::size_t n = ds.size();
  Dense q(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto xi = densify(ds.samples[i], ds.dim);
    for (std::size_t j = 0; j < n; ++j) {
      const auto xj = densify(ds.samples[j], ds.dim);
      q[i][j] = ds.samples[i].label * ds.samples[j].label * kernel(kind, gamma, xi, xj);
    }
  }
  return q;
}

inline double objective(const Dense& q, const std::vector<double>& a) {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) quad += a[i] * q[i][j] * a[j];
    lin += a[i];
  }
  return 0.5 * quad - lin;
}

// Euclidean projection onto {0 <= a <= c, y'a = 0}: a_i = clip(v_i - l y_i),
// with the multiplier l found by bisection on the monotone map l -> y'a(l).
inline std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y,
                                   double c) {
  double bound = c + 1.0;
  for (double x : v) bound = std::max(bound, std::abs(x) + c + 1.0);
  double lo = -bound, hi = bound;
  std::vector<double> a(v.size());
  auto fill = [&](double l) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      a[i] = std::clamp(v[i] - l * y[i], 0.0, c);
      s += y[i] * a[i];
    }
    return s;
  };
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fill(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  fill(0.5 * (lo + hi));
  return a;
}

struct DualOptimum {
  std::vector<double> alpha;
  double objective;
};

// Accelerated projected gradient (FISTA with adaptive restart) on the dual.
inline DualOptimum projected_gradient(const Dense& q, const std::vector<int>& y, double c,
                                      std::size_t max_steps = 1'000'000) {
  const std::size_t n = y.size();
  double lipschitz = 1e-12;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(q[i][j]);
    lipschitz = std::max(lipschitz, row);
  }
  const double step = 1.0 / lipschitz;
  std::vector<double> x(n, 0.0), z = x, grad(n);
  double t = 1.0;
  double fx = 0.0;
  std::size_t stalled = 0;
  for (std::size_t k = 0; k < max_steps && stalled < 500; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double g = -1.0;
      for (std::size_t j = 0; j < n; ++j) g += q[i][j] * z[j];
      grad[i] = z[i] - step * g;
    }
    std::vector<double> next = project(grad, y, c);
    const double f_next = objective(q, next);
    if (f_next > fx) {  // restart momentum
      t = 1.0;
      z = x;
      ++stalled;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) z[i] = next[i] + ((t - 1.0) / t_next) * (next[i] - x[i]);
    stalled = fx - f_next > 1e-14 * std::max(1.0, std::abs(fx)) ? 0 : stalled + 1;
    x = std::move(next);
    fx = f_next;
    t = t_next;
  }
  const double best = fx;
  const std::vector<double>& best_x = x;
  return {best_x, best};
}

inline cloudsvm::Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::uniform_real_distribution<double> feature(-1.0, 1.0);
  std::vector<cloudsvm::Sample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    cloudsvm::Sample s;
    s.id = i;
    s.label = (i == 0) ? 1 : (i == 1) ? -1 : (rng() % 2 ? 1 : -1);
    for (std::size_t k = 0; k < d; ++k) {
      s.features.push_back({static_cast<cloudsvm::FeatureIndex>(k + 1), feature(rng)});
    }
    samples.push_back(std::move(s));
  }
  return cloudsvm::make_dataset(std::move(samples));
}

}  // namespace oracle
