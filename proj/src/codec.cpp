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

#include "cloudsvm/codec.hpp"

#include "cloudsvm/error.hpp"
#include "cloudsvm/log.hpp"

namespace cloudsvm {

using nlohmann::json;

json kernel_to_json(const KernelSpec& spec) {
  return json{{"kind", to_string(spec.kind)},
              {"gamma", spec.gamma},
              {"degree", spec.degree},
              {"coef0", spec.coef0}};
}

KernelSpec kernel_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("kernel must be a JSON object");
  KernelSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key != "kind" && key != "gamma" && key != "degree" && key != "coef0") {
      throw ConfigError("unknown kernel field '" + key + "'");
    }
  }
  try {
    const auto kind = j.value("kind", std::string{"linear"});
    if (kind == "linear") {
      spec.kind = KernelKind::linear;
    } else if (kind == "rbf") {
      spec.kind = KernelKind::rbf;
    } else if (kind == "poly" || kind == "polynomial") {
      spec.kind = KernelKind::polynomial;
    } else {
      throw ConfigError("unknown kernel kind '" + kind + "'");
    }
    spec.gamma = j.value("gamma", 1.0);
    spec.degree = j.value("degree", 3);
    spec.coef0 = j.value("coef0", 0.0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
  validate(spec);
  return spec;
}

std::string model_to_json(const SvmModel& model, const ScalingParams& scaling) {
  json lines = json::array();
  json ids = json::array();
  for (const auto& sv : model.support_vectors) {
    lines.push_back(to_libsvm_line(sv));
    ids.push_back(sv.id);
  }
  json doc{{"format", "cloudsvm-model"},
           {"version", kModelFormatVersion},
           {"kernel", kernel_to_json(model.kernel)},
           {"bias", model.bias},
           {"dim", model.dim},
           {"support_vectors", std::move(lines)},
           {"sv_ids", std::move(ids)},
           {"dual_coefs", model.dual_coefs}};
  if (model.linear_weights) doc["linear_weights"] = *model.linear_weights;
  if (scaling.mode() == ScalingMode::minmax) {
    doc["scaling"] = json{{"min", scaling.min()}, {"max", scaling.max()}};
  }
  return doc.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != "cloudsvm-model") {
      throw FormatError("not a cloudsvm model document");
    }
    if (doc.at("version").get<int>() != kModelFormatVersion) {
      throw FormatError("unsupported model version " + doc.at("version").dump());
    }
    ModelFile file;
    SvmModel& m = file.model;
    m.kernel = kernel_from_json(doc.at("kernel"));
    m.bias = doc.at("bias").get<double>();
    m.dim = doc.at("dim").get<FeatureIndex>();
    const auto& lines = doc.at("support_vectors");
    const auto ids = doc.value("sv_ids", std::vector<SampleId>{});
    m.dual_coefs = doc.at("dual_coefs").get<std::vector<double>>();
    if (lines.size() != m.dual_coefs.size() || (!ids.empty() && ids.size() != lines.size())) {
      throw FormatError("support_vectors, sv_ids and dual_coefs lengths differ");
    }
    for (std::size_t k = 0; k < lines.size(); ++k) {
      Sample s = parse_libsvm_line(lines[k].get<std::string>(), k + 1);
      s.id = ids.empty() ? k : ids[k];
      m.support_vectors.push_back(std::move(s));
    }
    if (doc.contains("linear_weights")) {
      m.linear_weights = doc.at("linear_weights").get<std::vector<double>>();
    }
    if (doc.contains("scaling")) {
      file.scaling = ScalingParams(doc.at("scaling").at("min").get<std::vector<double>>(),
                                   doc.at("scaling").at("max").get<std::vector<double>>());
    }
    return file;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  } catch (const ParseError& e) {
    throw FormatError(std::string("malformed support vector: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

std::string encode_samples(std::span<const Sample> samples) {
  json ids = json::array();
  json lines = json::array();
  for (const auto& s : samples) {
    ids.push_back(s.id);
    lines.push_back(to_libsvm_line(s));
  }
  return json{{"ids", std::move(ids)}, {"lines", std::move(lines)}}.dump();
}

std::vector<Sample> decode_samples(const std::string& payload) {
  try {
    const json doc = json::parse(payload);
    const auto ids = doc.at("ids").get<std::vector<SampleId>>();
    const auto lines = doc.at("lines").get<std::vector<std::string>>();
    if (ids.size() != lines.size()) throw FormatError("payload ids/lines length mismatch");
    std::vector<Sample> out;
    out.reserve(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) {
      Sample s = parse_libsvm_line(lines[k], k + 1);
      s.id = ids[k];
      out.push_back(std::move(s));
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed sample payload: ") + e.what());
  }
}

}  // namespace cloudsvm
