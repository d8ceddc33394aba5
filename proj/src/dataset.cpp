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

#include "cloudsvm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "cloudsvm/error.hpp"
#include "detail/random.hpp"

namespace cloudsvm {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_index(std::string_view text, FeatureIndex& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Returns +1/-1 or 0 when the token is not an admissible label.
int to_label(double value, bool zero_as_negative) {
  if (value == 1.0) return 1;
  if (value == -1.0) return -1;
  if (value == 0.0 && zero_as_negative) return -1;
  return 0;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void sort_and_check(SparseVector& features, std::size_t line) {
  std::stable_sort(features.begin(), features.end(),
                   [](const Feature& a, const Feature& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < features.size(); ++i) {
    if (features[i].index == features[i - 1].index) {
      throw ParseError(line, 0, "duplicate feature index " + std::to_string(features[i].index));
    }
  }
}

FeatureIndex max_index(const Sample& s) { return s.features.empty() ? 0 : s.features.back().index; }

// Parses a line whose label (if any) has been split off already.
SparseVector parse_features(std::string_view rest, std::size_t line) {
  SparseVector features;
  std::size_t column = 1;
  while (true) {
    rest = trim(rest);
    if (rest.empty()) break;
    ++column;
    const auto space = rest.find_first_of(" \t");
    const std::string_view token = rest.substr(0, space);
    rest = space == std::string_view::npos ? std::string_view{} : rest.substr(space);
    const auto colon = token.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(line, column, "expected <index>:<value>, got '" + std::string(token) + "'");
    }
    Feature f{};
    if (!parse_index(token.substr(0, colon), f.index) || f.index == 0) {
      throw ParseError(line, column, "bad feature index in '" + std::string(token) + "'");
    }
    if (!parse_double(token.substr(colon + 1), f.value) || !std::isfinite(f.value)) {
      throw ParseError(line, column, "bad feature value in '" + std::string(token) + "'");
    }
    features.push_back(f);
  }
  sort_and_check(features, line);
  return features;
}

}  // namespace

Dataset make_dataset(std::vector<Sample> samples) {
  Dataset ds;
  std::unordered_set<SampleId> ids;
  ids.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.label != 1 && s.label != -1) throw ArgumentError("sample label must be -1 or +1");
    if (!ids.insert(s.id).second) throw ArgumentError("duplicate sample id " + std::to_string(s.id));
    for (std::size_t i = 0; i < s.features.size(); ++i) {
      const auto& f = s.features[i];
      if (f.index == 0) throw ArgumentError("feature indices are 1-based");
      if (i > 0 && f.index <= s.features[i - 1].index) {
        throw ArgumentError("sample features must be sorted without duplicates");
      }
      if (!std::isfinite(f.value)) throw ArgumentError("non-finite feature value");
    }
    ds.dim = std::max(ds.dim, max_index(s));
  }
  if (!samples.empty()) ds.dim = std::max<FeatureIndex>(ds.dim, 1);
  ds.samples = std::move(samples);
  return ds;
}

std::pair<std::size_t, std::size_t> class_counts(const Dataset& ds) {
  std::size_t pos = 0;
  for (const auto& s : ds.samples) pos += s.label > 0 ? 1 : 0;
  return {pos, ds.size() - pos};
}

// ---------------------------------------------------------------------------

Sample parse_libsvm_line(const std::string& line, std::size_t line_number,
                         const LibsvmOptions& options) {
  std::string_view body = line;
  if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
  body = trim(body);
  Sample s;
  const auto space = body.find_first_of(" \t");
  const std::string_view head = body.substr(0, space);
  if (head.find(':') != std::string_view::npos && options.allow_unlabeled) {
    s.features = parse_features(body, line_number);
    return s;
  }
  double value = 0;
  if (!parse_double(head, value)) {
    throw ParseError(line_number, 1, "bad label '" + std::string(head) + "'");
  }
  s.label = to_label(value, options.zero_as_negative);
  if (s.label == 0) {
    throw LabelError(line_number, 1, "label '" + std::string(head) + "' is not -1 or +1");
  }
  if (space != std::string_view::npos) s.features = parse_features(body.substr(space), line_number);
  return s;
}

Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options) {
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_number = 0;
  std::size_t unlabeled = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto head = body.substr(0, body.find_first_of(" \t"));
    if (options.allow_unlabeled && head.find(':') != std::string_view::npos) ++unlabeled;
    Sample s = parse_libsvm_line(line, line_number, options);
    s.id = samples.size();
    samples.push_back(std::move(s));
  }
  if (unlabeled != 0 && unlabeled != samples.size()) {
    throw ParseError(line_number, 0, "mix of labeled and unlabeled lines");
  }
  Dataset ds = make_dataset(std::move(samples));
  ds.labeled = unlabeled == 0;
  return ds;
}

Dataset parse_libsvm(const std::string& text, const LibsvmOptions& options) {
  std::istringstream in(text);
  return parse_libsvm(in, options);
}

std::string to_libsvm_line(const Sample& sample) {
  std::string out = sample.label > 0 ? "+1" : "-1";
  for (const auto& f : sample.features) {
    out += ' ';
    out += std::to_string(f.index);
    out += ':';
    out += format_double(f.value);
  }
  return out;
}

std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  for (const auto& s : ds.samples) {
    out += to_libsvm_line(s);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
  std::vector<Sample> samples;
  std::string line;
  std::size_t row = 0;
  std::size_t columns = 0;
  bool header_pending = options.has_header;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      cells.push_back(trim(body.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (columns == 0) {
      columns = cells.size();
      if (options.label_column >= columns) {
        throw ParseError(row, 0, "label column " + std::to_string(options.label_column + 1) +
                                     " out of range for " + std::to_string(columns) + " columns");
      }
    } else if (cells.size() != columns) {
      throw ParseError(row, 0, "expected " + std::to_string(columns) + " columns, got " +
                                   std::to_string(cells.size()));
    }
    Sample s;
    s.id = samples.size();
    FeatureIndex index = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double value = 0;
      if (!parse_double(cells[c], value) || !std::isfinite(value)) {
        throw ParseError(row, c + 1, "non-numeric cell '" + std::string(cells[c]) + "'");
      }
      if (c == options.label_column) {
        s.label = to_label(value, options.zero_as_negative);
        if (s.label == 0) {
          throw LabelError(row, c + 1, "label '" + std::string(cells[c]) + "' is not -1 or +1");
        }
        continue;
      }
      ++index;
      if (value != 0.0) s.features.push_back({index, value});
    }
    samples.push_back(std::move(s));
  }
  Dataset ds = make_dataset(std::move(samples));
  if (!ds.empty()) ds.dim = static_cast<FeatureIndex>(std::max<std::size_t>(columns - 1, 1));
  return ds;
}

Dataset parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  return parse_csv(in, options);
}

// ---------------------------------------------------------------------------

namespace {

Dataset subset(const Dataset& ds, std::vector<std::size_t> positions) {
  std::sort(positions.begin(), positions.end());
  Dataset out;
  out.dim = ds.dim;
  out.labeled = ds.labeled;
  out.samples.reserve(positions.size());
  for (const auto p : positions) out.samples.push_back(ds.samples[p]);
  return out;
}

std::vector<std::size_t> iota_positions(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

// Positions grouped by class (+1 first), each group shuffled.
std::vector<std::size_t> class_major_order(const Dataset& ds, detail::Rng& rng,
                                           std::size_t* positives = nullptr) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.size(); ++i) (ds.samples[i].label > 0 ? pos : neg).push_back(i);
  detail::shuffle(pos, rng);
  detail::shuffle(neg, rng);
  if (positives) *positives = pos.size();
  pos.insert(pos.end(), neg.begin(), neg.end());
  return pos;
}

}  // namespace

std::vector<Partition> partition(const Dataset& ds, std::size_t count, std::uint64_t seed,
                                 PartitionStrategy strategy) {
  if (count < 1 || count > ds.size()) {
    throw ArgumentError("partition count must be in [1, " + std::to_string(ds.size()) + "], got " +
                        std::to_string(count));
  }
  detail::Rng rng(seed);
  std::vector<std::size_t> order;
  switch (strategy) {
    case PartitionStrategy::round_robin:
      order = iota_positions(ds.size());
      break;
    case PartitionStrategy::shuffled:
      order = iota_positions(ds.size());
      detail::shuffle(order, rng);
      break;
    case PartitionStrategy::stratified:
      order = class_major_order(ds, rng);
      break;
  }
  std::vector<std::vector<std::size_t>> buckets(count);
  for (std::size_t i = 0; i < order.size(); ++i) buckets[i % count].push_back(order[i]);
  std::vector<Partition> parts;
  parts.reserve(count);
  for (std::size_t l = 0; l < count; ++l) parts.push_back({l + 1, subset(ds, std::move(buckets[l]))});
  return parts;
}

std::vector<Fold> kfold_split(const Dataset& ds, std::size_t k, std::uint64_t seed,
                              bool stratified) {
  if (k < 2 || k > ds.size()) {
    throw ArgumentError("fold count must be in [2, " + std::to_string(ds.size()) + "], got " +
                        std::to_string(k));
  }
  detail::Rng rng(seed);
  std::vector<std::size_t> order;
  if (stratified) {
    std::size_t positives = 0;
    order = class_major_order(ds, rng, &positives);
    const std::size_t negatives = ds.size() - positives;
    if (positives < k || negatives < k) {
      throw SplitError("stratified " + std::to_string(k) + "-fold split needs at least " +
                       std::to_string(k) + " samples per class; have " + std::to_string(positives) +
                       " positive and " + std::to_string(negatives) + " negative");
    }
  } else {
    order = iota_positions(ds.size());
    detail::shuffle(order, rng);
  }
  std::vector<std::size_t> fold_of(ds.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = i % k;
  std::vector<Fold> folds;
  folds.reserve(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < ds.size(); ++i) (fold_of[i] == f ? test : train).push_back(i);
    folds.push_back({subset(ds, std::move(train)), subset(ds, std::move(test))});
  }
  return folds;
}

// ---------------------------------------------------------------------------

ScalingParams::ScalingParams(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) throw ArgumentError("scaling min/max size mismatch");
}

Sample ScalingParams::apply(const Sample& sample) const {
  if (min_.empty()) return sample;
  Sample out;
  out.id = sample.id;
  out.label = sample.label;
  auto it = sample.features.begin();
  for (std::size_t j = 0; j < min_.size(); ++j) {
    const auto index = static_cast<FeatureIndex>(j + 1);
    double raw = 0.0;
    if (it != sample.features.end() && it->index == index) raw = (it++)->value;
    const double range = max_[j] - min_[j];
    const double scaled = range > 0.0 ? 2.0 * (raw - min_[j]) / range - 1.0 : 0.0;
    if (scaled != 0.0) out.features.push_back({index, scaled});
  }
  // Features unseen when fitting pass through untouched.
  for (; it != sample.features.end(); ++it) out.features.push_back(*it);
  return out;
}

Dataset ScalingParams::apply(const Dataset& ds) const {
  if (min_.empty()) return ds;
  Dataset out;
  out.dim = std::max<FeatureIndex>(ds.dim, static_cast<FeatureIndex>(min_.size()));
  out.labeled = ds.labeled;
  out.samples.reserve(ds.size());
  for (const auto& s : ds.samples) out.samples.push_back(apply(s));
  return out;
}

Dataset ScalingParams::invert(const Dataset& ds) const {
  if (min_.empty()) return ds;
  Dataset out = ds;
  for (auto& s : out.samples) {
    SparseVector restored;
    auto it = s.features.begin();
    for (std::size_t j = 0; j < min_.size(); ++j) {
      const auto index = static_cast<FeatureIndex>(j + 1);
      double scaled = 0.0;
      if (it != s.features.end() && it->index == index) scaled = (it++)->value;
      const double range = max_[j] - min_[j];
      const double raw = range > 0.0 ? min_[j] + (scaled + 1.0) * 0.5 * range : min_[j];
      if (raw != 0.0) restored.push_back({index, raw});
    }
    for (; it != s.features.end(); ++it) restored.push_back(*it);
    s.features = std::move(restored);
  }
  return out;
}

std::pair<Dataset, ScalingParams> scale_features(const Dataset& ds, ScalingMode mode) {
  if (ds.empty()) throw ArgumentError("cannot scale an empty dataset");
  if (mode == ScalingMode::none) return {ds, ScalingParams{}};
  // Absent entries are zeros and take part in the observed range.
  std::vector<double> lo(ds.dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(ds.dim, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> present(ds.dim, 0);
  for (const auto& s : ds.samples) {
    for (const auto& f : s.features) {
      lo[f.index - 1] = std::min(lo[f.index - 1], f.value);
      hi[f.index - 1] = std::max(hi[f.index - 1], f.value);
      ++present[f.index - 1];
    }
  }
  for (std::size_t j = 0; j < ds.dim; ++j) {
    if (present[j] < ds.size()) {
      lo[j] = std::min(lo[j], 0.0);
      hi[j] = std::max(hi[j], 0.0);
    }
  }
  ScalingParams params(std::move(lo), std::move(hi));
  return {params.apply(ds), params};
}

}  // namespace cloudsvm
