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

// Hinge loss, empirical risk and accuracy of a trained model.

#pragma once

#include <cstddef>

#include "cloudsvm/dataset.hpp"
#include "cloudsvm/solver.hpp"

namespace cloudsvm {

struct RiskReport {
  double empirical_risk = 0.0;
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t n = 0;
};

// max(0, 1 - y f)
double hinge_loss(double f, int y);

// Mean hinge loss over ds. Throws ArgumentError when ds is empty.
double empirical_risk(const SvmModel& model, const Dataset& ds);
double accuracy(const SvmModel& model, const Dataset& ds);

// Both measures from a single pass over ds.
RiskReport evaluate(const SvmModel& model, const Dataset& ds);

}  // namespace cloudsvm
