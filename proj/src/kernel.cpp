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

#include "cloudsvm/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string_view>

#include "cloudsvm/error.hpp"
#include "cloudsvm/log.hpp"

namespace cloudsvm {

void validate(const KernelSpec& spec) {
  if (spec.kind != KernelKind::linear && !(spec.gamma > 0.0 && std::isfinite(spec.gamma))) {
    throw ConfigError("kernel gamma must be positive");
  }
  if (spec.kind == KernelKind::polynomial && spec.degree < 1) {
    throw ConfigError("polynomial degree must be >= 1");
  }
  if (!std::isfinite(spec.coef0)) throw ConfigError("kernel coef0 must be finite");
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::linear:
      return "linear";
    case KernelKind::rbf:
      return "rbf";
    case KernelKind::polynomial:
      return "poly";
  }
  return "?";
}

namespace {

double parse_number(std::string_view text, std::string_view key) {
  double v = 0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("kernel parameter " + std::string(key) + ": bad number '" + std::string(text) +
                      "'");
  }
  return v;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

KernelSpec parse_kernel_spec(const std::string& text) {
  const std::string_view all = text;
  const auto colon = all.find(':');
  const std::string_view name = all.substr(0, colon);
  KernelSpec spec;
  if (name == "linear") {
    spec.kind = KernelKind::linear;
  } else if (name == "rbf") {
    spec.kind = KernelKind::rbf;
  } else if (name == "poly" || name == "polynomial") {
    spec.kind = KernelKind::polynomial;
  } else {
    throw ConfigError("unknown kernel '" + std::string(name) + "' (expected linear, rbf or poly)");
  }
  bool gamma_given = false;
  if (colon != std::string_view::npos) {
    std::string_view rest = all.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("kernel parameter '" + std::string(item) + "' is not key=value");
      }
      const auto key = item.substr(0, eq);
      const auto value = item.substr(eq + 1);
      if (key == "gamma") {
        spec.gamma = parse_number(value, key);
        gamma_given = true;
      } else if (key == "coef0" && spec.kind == KernelKind::polynomial) {
        spec.coef0 = parse_number(value, key);
      } else if (key == "degree" && spec.kind == KernelKind::polynomial) {
        const double d = parse_number(value, key);
        if (d != std::floor(d)) throw ConfigError("polynomial degree must be an integer");
        spec.degree = static_cast<int>(d);
      } else {
        throw ConfigError("kernel parameter '" + std::string(key) + "' not valid for " +
                          std::string(name));
      }
    }
  }
  if (spec.kind == KernelKind::linear && gamma_given) {
    warn("gamma is ignored by the linear kernel");
  }
  validate(spec);
  return spec;
}

std::string format_kernel_spec(const KernelSpec& spec) {
  switch (spec.kind) {
    case KernelKind::linear:
      return "linear";
    case KernelKind::rbf:
      return "rbf:gamma=" + shortest(spec.gamma);
    case KernelKind::polynomial:
      return "poly:degree=" + std::to_string(spec.degree) + ",gamma=" + shortest(spec.gamma) +
             ",coef0=" + shortest(spec.coef0);
  }
  return {};
}

double dot(const SparseVector& x, const SparseVector& z) {
  double sum = 0.0;
  auto a = x.begin();
  auto b = z.begin();
  while (a != x.end() && b != z.end()) {
    if (a->index == b->index) {
      sum += a->value * b->value;
      ++a;
      ++b;
    } else if (a->index < b->index) {
      ++a;
    } else {
      ++b;
    }
  }
  return sum;
}

double squared_norm(const SparseVector& x) {
  double sum = 0.0;
  for (const auto& f : x) sum += f.value * f.value;
  return sum;
}

double kernel_value(const KernelSpec& spec, const SparseVector& x, double x_norm2,
                    const SparseVector& z, double z_norm2) {
  switch (spec.kind) {
    case KernelKind::linear:
      return dot(x, z);
    case KernelKind::rbf: {
      double d2 = (x_norm2 + z_norm2) - 2.0 * dot(x, z);
      if (d2 < 0.0) d2 = 0.0;
      return std::exp(-spec.gamma * d2);
    }
    case KernelKind::polynomial:
      return std::pow(spec.gamma * dot(x, z) + spec.coef0, spec.degree);
  }
  return 0.0;
}

double kernel_value(const KernelSpec& spec, const SparseVector& x, const SparseVector& z) {
  if (spec.kind != KernelKind::rbf) return kernel_value(spec, x, 0.0, z, 0.0);
  return kernel_value(spec, x, squared_norm(x), z, squared_norm(z));
}

double q_entry(const KernelSpec& spec, const Sample& a, const Sample& b) {
  return static_cast<double>(a.label * b.label) * kernel_value(spec, a.features, b.features);
}

Matrix Matrix::transposed() const {
  Matrix t(cols, rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Matrix q_block(const KernelSpec& spec, std::span<const Sample> row_samples,
               std::span<const Sample> col_samples) {
  Matrix m(row_samples.size(), col_samples.size());
  for (std::size_t i = 0; i < row_samples.size(); ++i) {
    for (std::size_t j = 0; j < col_samples.size(); ++j) {
      m(i, j) = q_entry(spec, row_samples[i], col_samples[j]);
    }
  }
  return m;
}

QMatrix q_matrix(const KernelSpec& spec, std::span<const Sample> samples) {
  return q_block(spec, samples, samples);
}

Matrix kernel_matrix(const KernelSpec& spec, std::span<const Sample> samples) {
  Matrix m(samples.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = 0; j < samples.size(); ++j) {
      m(i, j) = kernel_value(spec, samples[i].features, samples[j].features);
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

QRowCache::QRowCache(const KernelSpec& spec, std::span<const Sample> samples,
                     std::size_t budget_bytes)
    : spec_(spec), samples_(samples) {
  const std::size_t n = samples_.size();
  if (n == 0) return;
  const std::size_t row_bytes = n * sizeof(double);
  if (budget_bytes < row_bytes) {
    throw ConfigError("kernel cache budget of " + std::to_string(budget_bytes) +
                      " bytes is below one row (" + std::to_string(row_bytes) + " bytes)");
  }
  capacity_ = std::min(n, budget_bytes / row_bytes);
  norms_.resize(n);
  diagonal_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    norms_[i] = squared_norm(samples_[i].features);
    diagonal_[i] =
        kernel_value(spec_, samples_[i].features, norms_[i], samples_[i].features, norms_[i]);
  }
}

std::vector<double> QRowCache::compute_row(std::size_t i) const {
  const std::size_t n = samples_.size();
  std::vector<double> row(n);
  const Sample& a = samples_[i];
  for (std::size_t j = 0; j < n; ++j) {
    const Sample& b = samples_[j];
    row[j] = static_cast<double>(a.label * b.label) *
             kernel_value(spec_, a.features, norms_[i], b.features, norms_[j]);
  }
  return row;
}

QRowCache::Row QRowCache::row(std::size_t i) const {
  {
    std::lock_guard lock(mutex_);
    if (auto it = entries_.find(i); it != entries_.end()) {
      recency_.splice(recency_.begin(), recency_, it->second.position);
      ++hits_;
      return it->second.row;
    }
    ++misses_;
  }
  auto fresh = std::make_shared<const std::vector<double>>(compute_row(i));
  std::lock_guard lock(mutex_);
  if (auto it = entries_.find(i); it != entries_.end()) return it->second.row;
  if (entries_.size() >= capacity_) {
    entries_.erase(recency_.back());
    recency_.pop_back();
  }
  recency_.push_front(i);
  entries_.emplace(i, Entry{fresh, recency_.begin()});
  return fresh;
}

std::size_t QRowCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::size_t QRowCache::misses() const {
  std::lock_guard lock(mutex_);
  return misses_;
}

}  // namespace cloudsvm
