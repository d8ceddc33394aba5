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

#include <cmath>
#include <random>
#include <string>

#include "cloudsvm/error.hpp"
#include "cloudsvm/kernel.hpp"
#include "cloudsvm/log.hpp"
#include "oracles.hpp"

using namespace cloudsvm;

namespace {

KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma, 3, 0.0}; }

// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
double min_eigenvalue(Matrix a) {
  const std::size_t n = a.rows;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  double lo = a(0, 0);
  for (std::size_t i = 1; i < n; ++i) lo = std::min(lo, a(i, i));
  return lo;
}

}  // namespace

TEST_CASE("kernel values") {
  const SparseVector x{{1, 1.0}, {2, 2.0}}, z{{1, 3.0}, {2, 4.0}};
  CHECK(kernel_value(KernelSpec{}, x, z) == 11.0);
  CHECK(kernel_value(rbf(7.0), x, x) == 1.0);
  CHECK(kernel_value(rbf(0.5), SparseVector{}, SparseVector{{1, 1.0}, {2, 1.0}}) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(kernel_value(rbf(0.5), SparseVector{{1, 0.0}, {2, 0.0}},
                     SparseVector{{1, 1.0}, {2, 1.0}}) ==
        doctest::Approx(0.3678794412).epsilon(1e-10));
  const KernelSpec poly{KernelKind::polynomial, 0.5, 2, 1.0};
  CHECK(kernel_value(poly, x, z) == doctest::Approx(std::pow(0.5 * 11.0 + 1.0, 2)));
  CHECK(dot(SparseVector{{1, 2.0}, {4, 1.0}}, SparseVector{{2, 5.0}, {4, 3.0}}) == 3.0);
  CHECK(squared_norm(x) == 5.0);
}

TEST_CASE("q_entry signs") {
  const Sample a{0, {{1, 1.0}, {2, 2.0}}, 1}, b{1, {{1, 3.0}, {2, 4.0}}, 1},
      c{2, {{1, 3.0}, {2, 4.0}}, -1};
  CHECK(q_entry(KernelSpec{}, a, b) == 11.0);
  CHECK(q_entry(KernelSpec{}, a, c) == -11.0);
  CHECK(q_entry(rbf(2.0), c, c) == 1.0);
}

TEST_CASE("kernel symmetry is exact") {
  std::mt19937_64 rng(1);
  const auto ds = oracle::random_dataset(rng, 40, 6);
  for (const auto& spec : {KernelSpec{}, rbf(0.7), KernelSpec{KernelKind::polynomial, 0.3, 3, 1.0}}) {
    for (const auto& a : ds.samples) {
      for (const auto& b : ds.samples) {
        CHECK(kernel_value(spec, a.features, b.features) ==
              kernel_value(spec, b.features, a.features));
      }
    }
    const Matrix q = q_matrix(spec, ds.samples);
    CHECK(q == q.transposed());
  }
}

TEST_CASE("kernel matrices are positive semidefinite") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng() % 19;
    const auto ds = oracle::random_dataset(rng, n, 1 + rng() % 5);
    for (const auto& spec : {KernelSpec{}, rbf(0.1 + (rng() % 50) / 10.0)}) {
      CHECK(min_eigenvalue(kernel_matrix(spec, ds.samples)) >= -1e-8);
    }
  }
}

TEST_CASE("matches the independent kernel") {
  std::mt19937_64 rng(4);
  const auto ds = oracle::random_dataset(rng, 15, 4);
  const auto ref_lin = oracle::q_matrix(ds, oracle::Kind::linear, 1.0);
  const auto ref_rbf = oracle::q_matrix(ds, oracle::Kind::rbf, 0.8);
  const Matrix lin = q_matrix(KernelSpec{}, ds.samples);
  const Matrix r = q_matrix(rbf(0.8), ds.samples);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.size(); ++j) {
      CHECK(lin(i, j) == doctest::Approx(ref_lin[i][j]).epsilon(1e-12));
      CHECK(r(i, j) == doctest::Approx(ref_rbf[i][j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("cross blocks are transposes of each other") {
  std::mt19937_64 rng(5);
  const auto a = oracle::random_dataset(rng, 7, 3);
  const auto b = oracle::random_dataset(rng, 11, 3);
  for (const auto& spec : {KernelSpec{}, rbf(1.5)}) {
    const Matrix ab = q_block(spec, a.samples, b.samples);
    const Matrix ba = q_block(spec, b.samples, a.samples);
    CHECK(ab.rows == 7);
    CHECK(ab.cols == 11);
    CHECK(ab == ba.transposed());
  }
}

TEST_CASE("row cache is transparent") {
  std::mt19937_64 rng(6);
  const auto ds = oracle::random_dataset(rng, 3, 2);
  const Matrix full = q_matrix(rbf(0.9), ds.samples);
  const std::size_t row_bytes = 3 * sizeof(double);

  QRowCache big(rbf(0.9), ds.samples, 1 << 20);
  QRowCache tiny(rbf(0.9), ds.samples, row_bytes);
  CHECK(tiny.capacity_rows() == 1);
  for (int round = 0; round < 3; ++round) {
    for (std::size_t i = 0; i < 3; ++i) {
      const auto a = big.row(i);
      const auto b = tiny.row(i);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK((*a)[j] == full(i, j));
        CHECK((*b)[j] == full(i, j));
      }
    }
  }
  CHECK(big.hits() == 6);
  CHECK(big.misses() == 3);
  CHECK(tiny.misses() == 9);
  for (std::size_t i = 0; i < 3; ++i) CHECK(big.diagonal()[i] == full(i, i));

  // A held row survives eviction.
  const auto held = tiny.row(0);
  tiny.row(1);
  CHECK((*held)[0] == full(0, 0));

  CHECK_THROWS_AS(QRowCache(rbf(0.9), ds.samples, row_bytes - 1), ConfigError);

  const std::vector<Sample> none;
  QRowCache empty(rbf(0.9), none, 0);
  CHECK(empty.size() == 0);
}

TEST_CASE("kernel spec grammar") {
  CHECK(parse_kernel_spec("linear") == KernelSpec{});
  CHECK(parse_kernel_spec("rbf:gamma=0.25") == rbf(0.25));
  const KernelSpec poly = parse_kernel_spec("poly:degree=2,gamma=0.5,coef0=1");
  CHECK(poly == KernelSpec{KernelKind::polynomial, 0.5, 2, 1.0});
  CHECK(parse_kernel_spec(format_kernel_spec(poly)) == poly);
  CHECK(parse_kernel_spec(format_kernel_spec(rbf(0.1))) == rbf(0.1));

  std::string warned;
  set_warning_handler([&](const std::string& m) { warned = m; });
  const KernelSpec inert = parse_kernel_spec("linear:gamma=100000000");
  CHECK_FALSE(warned.empty());
  CHECK(inert.kind == KernelKind::linear);
  CHECK(kernel_value(inert, {{1, 2.0}}, {{1, 3.0}}) == 6.0);
  set_warning_handler({});

  CHECK_THROWS_AS(parse_kernel_spec("rbf:gamma=0"), ConfigError);
  CHECK_THROWS_AS(parse_kernel_spec("rbf:gamma=-1"), ConfigError);
  CHECK_THROWS_AS(parse_kernel_spec("poly:degree=0"), ConfigError);
  CHECK_THROWS_AS(parse_kernel_spec("sigmoid"), ConfigError);
  CHECK_THROWS_AS(parse_kernel_spec("rbf:gama=1"), ConfigError);
  CHECK(to_string(KernelKind::rbf) == "rbf");
}
