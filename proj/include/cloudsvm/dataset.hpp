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

// Labeled sparse datasets: ingestion (libsvm, CSV), partitioning across
// nodes, k-fold splitting and feature scaling.

#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

namespace cloudsvm {

using SampleId = std::uint64_t;
using FeatureIndex = std::uint32_t;

struct Feature {
  FeatureIndex index;  // 1-based
  double value;

  friend bool operator==(const Feature&, const Feature&) = default;
};

// Sorted by index, no duplicates.
using SparseVector = std::vector<Feature>;

struct Sample {
  SampleId id = 0;
  SparseVector features;
  int label = 1;  // -1 or +1

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  FeatureIndex dim = 0;
  // False when the source carried no labels (prediction input); labels are
  // then placeholders.
  bool labeled = true;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Builds a dataset from samples, computing dim and validating the Sample
// invariants and id uniqueness. Throws ArgumentError.
Dataset make_dataset(std::vector<Sample> samples);

// Number of samples labeled +1 and -1.
std::pair<std::size_t, std::size_t> class_counts(const Dataset& ds);

struct Partition {
  std::size_t index = 1;  // 1..L
  Dataset data;
};

// ---------------------------------------------------------------------------
// Text formats

struct LibsvmOptions {
  bool zero_as_negative = false;
  // Accept lines without a leading label. If every line lacks one the result
  // has labeled == false.
  bool allow_unlabeled = false;
};

// `<label> <idx>:<val> ...` per line; blank lines and `#` comments skipped.
// Ids are assigned by sample order starting at 0.
Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {});
Dataset parse_libsvm(const std::string& text, const LibsvmOptions& options = {});

std::string to_libsvm_line(const Sample& sample);
std::string serialize_libsvm(const Dataset& ds);

// Parses the features of one libsvm line that must carry a label. Used by
// payload codecs; `line_number` only feeds error messages.
Sample parse_libsvm_line(const std::string& line, std::size_t line_number = 1,
                         const LibsvmOptions& options = {});

struct CsvOptions {
  std::size_t label_column = 0;  // 0-based
  bool has_header = false;
  bool zero_as_negative = false;
};

Dataset parse_csv(std::istream& in, const CsvOptions& options = {});
Dataset parse_csv(const std::string& text, const CsvOptions& options = {});

// ---------------------------------------------------------------------------
// Splitting

enum class PartitionStrategy {
  round_robin,  // deal in input order
  shuffled,     // seeded permutation, then deal
  stratified,   // seeded permutation within each class, classes dealt in turn
};

std::vector<Partition> partition(const Dataset& ds, std::size_t count, std::uint64_t seed,
                                 PartitionStrategy strategy);

struct Fold {
  Dataset train;
  Dataset test;
};

std::vector<Fold> kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed,
                              bool stratified);

// ---------------------------------------------------------------------------
// Scaling

enum class ScalingMode { none, minmax };

// Per-feature affine map fitted on one dataset, reapplicable to another.
class ScalingParams {
 public:
  ScalingParams() = default;  // identity
  ScalingParams(std::vector<double> min, std::vector<double> max);

  ScalingMode mode() const noexcept { return min_.empty() ? ScalingMode::none : ScalingMode::minmax; }
  // Entries are for features 1..size().
  const std::vector<double>& min() const noexcept { return min_; }
  const std::vector<double>& max() const noexcept { return max_; }

  Dataset apply(const Dataset& ds) const;
  Sample apply(const Sample& sample) const;
  Dataset invert(const Dataset& ds) const;

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

// minmax maps each feature's observed [min,max] onto [-1,1]; constant features
// map to 0.
std::pair<Dataset, ScalingParams> scale_features(const Dataset& ds, ScalingMode mode);

}  // namespace cloudsvm
