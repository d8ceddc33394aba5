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

// Kernel functions and the Q matrix of the dual problem,
// [Q]_ij = y_i y_j K(x_i, x_j).

#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cloudsvm/dataset.hpp"

namespace cloudsvm {

enum class KernelKind { linear, rbf, polynomial };

struct KernelSpec {
  KernelKind kind = KernelKind::linear;
  double gamma = 1.0;  // rbf, polynomial; inert for linear
  int degree = 3;      // polynomial
  double coef0 = 0.0;  // polynomial

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

// Throws ConfigError on gamma <= 0 or degree < 1 where they matter.
void validate(const KernelSpec& spec);

// Grammar: `linear`, `rbf:gamma=<v>`, `poly:degree=<d>,gamma=<v>,coef0=<v>`.
// A gamma given for `linear` is accepted with a warning and ignored.
KernelSpec parse_kernel_spec(const std::string& text);
std::string format_kernel_spec(const KernelSpec& spec);
std::string to_string(KernelKind kind);

double dot(const SparseVector& x, const SparseVector& z);
double squared_norm(const SparseVector& x);

// Symmetric in its arguments bit for bit.
double kernel_value(const KernelSpec& spec, const SparseVector& x, const SparseVector& z);

// RBF/linear/polynomial given precomputed squared norms of x and z.
double kernel_value(const KernelSpec& spec, const SparseVector& x, double x_norm2,
                    const SparseVector& z, double z_norm2);

double q_entry(const KernelSpec& spec, const Sample& a, const Sample& b);

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

using QMatrix = Matrix;

QMatrix q_matrix(const KernelSpec& spec, std::span<const Sample> samples);

// Cross block with rows from `row_samples` and columns from `col_samples`.
Matrix q_block(const KernelSpec& spec, std::span<const Sample> row_samples,
               std::span<const Sample> col_samples);

// Plain kernel matrix (no label signs).
Matrix kernel_matrix(const KernelSpec& spec, std::span<const Sample> samples);

// On-demand Q rows with an LRU cache bounded by a byte budget. Rows are
// returned by shared ownership so an eviction never invalidates a row a
// reader still holds. Safe for concurrent readers. `samples` must outlive the
// cache.
class QRowCache {
 public:
  using Row = std::shared_ptr<const std::vector<double>>;

  QRowCache(const KernelSpec& spec, std::span<const Sample> samples, std::size_t budget_bytes);

  std::size_t size() const noexcept { return samples_.size(); }
  std::size_t capacity_rows() const noexcept { return capacity_; }
  const std::vector<double>& diagonal() const noexcept { return diagonal_; }

  Row row(std::size_t i) const;

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  std::vector<double> compute_row(std::size_t i) const;

  KernelSpec spec_;
  std::span<const Sample> samples_;
  std::vector<double> norms_;
  std::vector<double> diagonal_;
  std::size_t capacity_ = 0;

  struct Entry {
    Row row;
    std::list<std::size_t>::iterator position;
  };
  mutable std::mutex mutex_;
  mutable std::list<std::size_t> recency_;  // front = most recent
  mutable std::unordered_map<std::size_t, Entry> entries_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

}  // namespace cloudsvm
