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

// JSON codecs: kernel specs, model files, and the sample payloads that cross
// the map/reduce boundary.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "cloudsvm/dataset.hpp"
#include "cloudsvm/kernel.hpp"
#include "cloudsvm/solver.hpp"
#include "json.hpp"

namespace cloudsvm {

// {"kind","gamma","degree","coef0"}
nlohmann::json kernel_to_json(const KernelSpec& spec);
// Missing fields take their defaults; unknown fields raise ConfigError.
KernelSpec kernel_from_json(const nlohmann::json& j);

inline constexpr int kModelFormatVersion = 1;

struct ModelFile {
  SvmModel model;
  ScalingParams scaling;  // identity unless the model was trained on scaled data
};

// Versioned model document; support vectors are stored as libsvm lines with
// shortest round-trip number formatting, so decisions reproduce bit for bit.
std::string model_to_json(const SvmModel& model, const ScalingParams& scaling = {});
// Throws FormatError.
ModelFile model_from_json(const std::string& text);

// Payload codec: {"ids":[...],"lines":["<libsvm line>",...]}.
std::string encode_samples(std::span<const Sample> samples);
std::vector<Sample> decode_samples(const std::string& payload);

}  // namespace cloudsvm
