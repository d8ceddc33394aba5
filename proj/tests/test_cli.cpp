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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cloudsvm/cli.hpp"
#include "json.hpp"

using namespace cloudsvm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cloudsvm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("cloudsvm-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string toy_data() {
  std::string text;
  for (int i = 0; i < 20; ++i) {
    const double x = 0.1 * (i % 10) + 1.0;
    text += (i % 2 ? "+1 1:" + std::to_string(x) : "-1 1:-" + std::to_string(x)) + " 2:0.5\n";
  }
  return text;
}

}  // namespace

TEST_CASE("train writes the model, trace and manifest") {
  const fs::path dir = temp_dir("train");
  write(dir / "toy.libsvm", toy_data());
  const Run r = cli({"train", "--data", (dir / "toy.libsvm").string(), "--l", "2", "--c", "1",
                     "--kernel", "linear", "--seed", "3", "--out", (dir / "out").string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.rfind("t=1 risk=", 0) == 0);
  for (const auto& l : lines(r.out)) {
    for (const std::string tag : {"model: ", "trace: ", "manifest: "}) {
      if (l.rfind(tag, 0) == 0) CHECK(fs::exists(l.substr(tag.size())));
    }
  }
  CHECK(fs::exists(dir / "out" / "model.json"));
  CHECK(slurp(dir / "out" / "trace.csv").rfind("t,risk,accuracy,global_sv_count", 0) == 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(manifest["seed"] == 3);
  CHECK(manifest.contains("wall_time_seconds"));

  // Same invocation, same model.
  const std::string first = slurp(dir / "out" / "model.json");
  CHECK(cli({"train", "--data", (dir / "toy.libsvm").string(), "--l", "2", "--seed", "3",
             "--out", (dir / "out").string()})
            .code == kExitOk);
  CHECK(slurp(dir / "out" / "model.json") == first);
}

TEST_CASE("usage errors exit with 1") {
  const fs::path dir = temp_dir("usage");
  write(dir / "toy.libsvm", toy_data());
  const Run zero = cli({"train", "--data", (dir / "toy.libsvm").string(), "--l", "0", "--out",
                        (dir / "o").string()});
  CHECK(zero.code == kExitUsage);
  CHECK((zero.err + zero.out).find("--l") != std::string::npos);
  CHECK(cli({"train", "--data", "x", "--out", "y", "--bogus"}).code == kExitUsage);
  CHECK(cli({"train", "--data", "x", "--out", "y", "--kernel", "rbf:gamma=-1"}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"inspect"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("missing data file exits with 2 and names the path") {
  const fs::path dir = temp_dir("missing");
  const std::string path = (dir / "nope.libsvm").string();
  const Run r = cli({"train", "--data", path, "--out", (dir / "o").string()});
  CHECK(r.code == kExitRuntime);
  CHECK(r.err.find(path) != std::string::npos);
}

TEST_CASE("training failure exits with 2") {
  const fs::path dir = temp_dir("single");
  write(dir / "one.libsvm", "+1 1:1\n+1 1:2\n");
  CHECK(cli({"train", "--data", (dir / "one.libsvm").string(), "--l", "1", "--out",
             (dir / "o").string()})
            .code == kExitRuntime);
}

TEST_CASE("predict with the analytic pair model") {
  const fs::path dir = temp_dir("predict");
  write(dir / "pair.libsvm", "+1 1:1\n-1 1:-1\n");
  REQUIRE(cli({"train", "--data", (dir / "pair.libsvm").string(), "--l", "1", "--c", "10",
               "--out", (dir / "m").string()})
              .code == kExitOk);
  const std::string model = (dir / "m" / "model.json").string();
  const Run r = cli({"predict", "--model", model, "--data", (dir / "pair.libsvm").string()});
  REQUIRE(r.code == kExitOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].rfind("0,+1,", 0) == 0);
  CHECK(rows[1].rfind("1,-1,", 0) == 0);
  CHECK(std::stod(rows[0].substr(5)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::stod(rows[1].substr(5)) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.err.find("accuracy=1") != std::string::npos);

  write(dir / "unlabeled.libsvm", "1:0.5\n1:-2\n");
  const Run u = cli({"predict", "--model", model, "--data", (dir / "unlabeled.libsvm").string()});
  CHECK(u.code == kExitOk);
  CHECK(lines(u.out).size() == 2);
  CHECK(u.err.find("accuracy") == std::string::npos);

  write(dir / "wide.libsvm", "+1 1:1 5:2\n");
  CHECK(cli({"predict", "--model", model, "--data", (dir / "wide.libsvm").string()}).code ==
        kExitRuntime);

  write(dir / "corrupt.json", "{\"format\": \"cloudsvm-model\", \"version\": 1, \"kernel\": ");
  CHECK(cli({"predict", "--model", (dir / "corrupt.json").string(), "--data",
             (dir / "pair.libsvm").string()})
            .code == kExitRuntime);

  const Run inspect = cli({"inspect", "--model", model, "--data", (dir / "pair.libsvm").string()});
  CHECK(inspect.code == kExitOk);
  CHECK(inspect.out.find("svs=2") != std::string::npos);
  CHECK(inspect.out.find("samples=2") != std::string::npos);
}

TEST_CASE("predict applies the stored scaling") {
  const fs::path dir = temp_dir("scaled");
  write(dir / "toy.libsvm", toy_data());
  REQUIRE(cli({"train", "--data", (dir / "toy.libsvm").string(), "--l", "2", "--scale", "minmax",
               "--out", (dir / "m").string()})
              .code == kExitOk);
  const Run r = cli({"predict", "--model", (dir / "m" / "model.json").string(), "--data",
                     (dir / "toy.libsvm").string()});
  CHECK(r.code == kExitOk);
  CHECK(r.err.find("accuracy=1 ") != std::string::npos);
}

TEST_CASE("experiment command") {
  const fs::path dir = temp_dir("experiment");
  write(dir / "toy.libsvm", toy_data());
  write(dir / "cfg.json", R"({"name": "toy", "dataset": {"path": "toy.libsvm"},
      "cloud": {"l": 2}, "cv_folds": 2, "grid": {"c": [1]}, "output_dir": "out"})");
  const Run r = cli({"experiment", "--config", (dir / "cfg.json").string()});
  REQUIRE(r.code == kExitOk);
  const auto out = lines(r.out);
  CHECK(out.back().rfind("accuracy=1 iterations=", 0) == 0);
  for (const auto& l : out) {
    if (l.rfind("wrote ", 0) == 0) CHECK(fs::exists(l.substr(6)));
  }

  write(dir / "bad.json", R"({"dataset": {"path": "toy.libsvm"}, "colour": 1})");
  const Run bad = cli({"experiment", "--config", (dir / "bad.json").string()});
  CHECK(bad.code == kExitUsage);
  CHECK(bad.err.find("colour") != std::string::npos);

  CHECK(cli({"experiment", "--config", dir.string()}).code == kExitUsage);
}

TEST_CASE("the installed binary reports exit codes") {
  const std::string bin = CLOUDSVM_CLI_PATH;
  CHECK(std::system((bin + " inspect > /dev/null 2>&1").c_str()) != 0);
  const int status = std::system((bin + " --help > /dev/null 2>&1").c_str());
  CHECK(status == 0);
}
