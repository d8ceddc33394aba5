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

#include "cloudsvm/risk.hpp"

#include <algorithm>
#include <vector>

#include "cloudsvm/error.hpp"

namespace cloudsvm {

double hinge_loss(double f, int y) { return std::max(0.0, 1.0 - y * f); }

RiskReport evaluate(const SvmModel& model, const Dataset& ds) {
  if (ds.empty()) throw ArgumentError("cannot evaluate on an empty dataset");
  RiskReport report;
  report.n = ds.size();
  std::vector<double> losses;
  losses.reserve(ds.size());
  for (const auto& s : ds.samples) {
    const double f = decision(model, s.features);
    losses.push_back(hinge_loss(f, s.label));
    if (label_of(f) == s.label) ++report.correct;
  }
  // Summing in sorted order makes the risk independent of sample order.
  std::sort(losses.begin(), losses.end());
  double loss = 0.0;
  for (const double l : losses) loss += l;
  report.empirical_risk = loss / static_cast<double>(report.n);
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.n);
  return report;
}

double empirical_risk(const SvmModel& model, const Dataset& ds) {
  return evaluate(model, ds).empirical_risk;
}

double accuracy(const SvmModel& model, const Dataset& ds) { return evaluate(model, ds).accuracy; }

}  // namespace cloudsvm
