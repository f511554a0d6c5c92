// Copyright 2026 The qphot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// In-process runs of the command-line front end.

#include "doctest.h"

#include "cli.hpp"
#include "json.hpp"
#include "qphot/log.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using qphot::cli::run;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qphot_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path writeConfig(const fs::path& dir, const std::string& text) {
  const auto path = dir / "run.ini";
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

int csvRows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  int n = -1;
  while (std::getline(in, line)) {
    if (!line.empty()) ++n;
  }
  return n;
}

std::string header(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

int runIn(const std::string& sub, const fs::path& config, const fs::path& out, std::vector<std::string> extra = {}) {
  std::vector<std::string> args{sub, "--config", config.string(), "--out", out.string(), "--threads", "1"};
  args.insert(args.end(), extra.begin(), extra.end());
  return run(args);
}

std::string captureHelp(const std::string& sub, int& code) {
  std::stringstream ss;
  auto* old = std::cout.rdbuf(ss.rdbuf());
  code = run({sub, "--help"});
  std::cout.rdbuf(old);
  return ss.str();
}

// Determinism check: two runs into fresh directories must agree byte for byte.
void checkRepeatable(const std::string& sub, const fs::path& config, const fs::path& dir) {
  REQUIRE(runIn(sub, config, dir / "a") == 0);
  REQUIRE(runIn(sub, config, dir / "b") == 0);
  const auto a = snapshot(dir / "a");
  const auto b = snapshot(dir / "b");
  CHECK(a.size() >= 2);
  CHECK(a == b);
}

const char* kSmallQrc = R"([split]
washout = 20
train = 120
test = 40
[qrc]
modes = 3
trace_steps = 10
[sweep]
realizations = 20
)";

const char* kSmallQam = R"([qam]
n = 3
m = 3
mean_photon = 4
min_cutoff = 16
[trajectories]
count = 3
[success]
m = 3
mean_photon = 4
trajectories = 4
[basins]
radii = 1.0
angles = 6
trajectories_per_point = 1
)";

struct QuietLog {
  QuietLog() : previous(qphot::log::level()) { qphot::log::setLevel(qphot::log::Level::Off); }
  ~QuietLog() { qphot::log::setLevel(previous); }
  qphot::log::Level previous;
};

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("qrc-run writes its files") {
    QuietLog quiet;
    const auto dir = scratch("qrc_run");
    const auto cfg = writeConfig(dir, kSmallQrc);
    REQUIRE(runIn("qrc-run", cfg, dir / "out") == 0);
    CHECK(csvRows(dir / "out" / "predictions.csv") == 40);
    CHECK(header(dir / "out" / "predictions.csv") == "k,target,prediction");
    CHECK(csvRows(dir / "out" / "correlations.csv") == 10);
    const auto result = nlohmann::json::parse(slurp(dir / "out" / "result.json"));
    CHECK(result.contains("test_nmse"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(manifest["command"] == "qrc-run");
    CHECK(manifest["config"]["qrc"]["modes"] == "3");
    CHECK(!manifest["dataset_hash"].get<std::string>().empty());
    // Nothing lands next to the output directory.
    std::vector<std::string> entries;
    for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path().filename().string());
    CHECK(entries.size() == 2);
  }

  TEST_CASE("sweep cardinality") {
    QuietLog quiet;
    const auto dir = scratch("qrc_sweep");
    const auto cfg = writeConfig(dir, kSmallQrc);
    REQUIRE(runIn("qrc-sweep", cfg, dir / "out") == 0);
    CHECK(csvRows(dir / "out" / "sweep.csv") == 3 * 4 * 20);
    CHECK(header(dir / "out" / "sweep.csv") ==
          "cavity_squeezing_dB,noise_relative_intensity,seed,train_nmse,test_nmse");
  }

  TEST_CASE("qrc outputs are byte-identical on rerun") {
    QuietLog quiet;
    const auto dir = scratch("qrc_repeat");
    const auto cfg = writeConfig(dir, kSmallQrc);
    checkRepeatable("qrc-run", cfg, dir / "run");
    checkRepeatable("qrc-sweep", cfg, dir / "sweep");
  }

  TEST_CASE("seed override changes the run") {
    QuietLog quiet;
    const auto dir = scratch("seed");
    const auto cfg = writeConfig(dir, kSmallQrc);
    REQUIRE(runIn("qrc-run", cfg, dir / "a", {"--seed", "7"}) == 0);
    REQUIRE(runIn("qrc-run", cfg, dir / "b", {"--seed", "8"}) == 0);
    CHECK(slurp(dir / "a" / "predictions.csv") != slurp(dir / "b" / "predictions.csv"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest["seeds"]["network_seed"] == 7);
  }

  TEST_CASE("qam-steady at zero drive is the vacuum") {
    QuietLog quiet;
    const auto dir = scratch("steady");
    const auto cfg = writeConfig(dir, "[qam]\ndrive = 0\nmin_cutoff = 8\n[wigner]\npoints = 21\n");
    REQUIRE(runIn("qam-steady", cfg, dir / "out") == 0);
    std::ifstream fock(dir / "out" / "fock.csv");
    std::string line;
    std::getline(fock, line);
    CHECK(line == "k,p_k");
    std::getline(fock, line);
    CHECK(line.rfind("0,", 0) == 0);
    CHECK(std::stod(line.substr(2)) == doctest::Approx(1.0).epsilon(1e-10));
    while (std::getline(fock, line)) CHECK(std::abs(std::stod(line.substr(line.find(',') + 1))) < 1e-10);
    CHECK(csvRows(dir / "out" / "wigner.csv") == 21 * 21);
    const auto steady = nlohmann::json::parse(slurp(dir / "out" / "steady.json"));
    CHECK(steady["mandel_q"].is_null());
    CHECK(steady["cutoff"]["cutoff"] == 8);
  }

  TEST_CASE("qam-spectrum table and window") {
    QuietLog quiet;
    const auto dir = scratch("spectrum");
    const auto cfg = writeConfig(dir, kSmallQam);
    REQUIRE(runIn("qam-spectrum", cfg, dir / "out") == 0);
    CHECK(csvRows(dir / "out" / "spectrum.csv") == 6);
    std::ifstream table(dir / "out" / "spectrum.csv");
    std::string line;
    std::getline(table, line);
    CHECK(line == "index,re,im,sector");
    std::getline(table, line);
    std::stringstream row(line);
    std::string idx, re;
    std::getline(row, idx, ',');
    std::getline(row, re, ',');
    CHECK(std::abs(std::stod(re)) < 1e-8);
    const auto window = nlohmann::json::parse(slurp(dir / "out" / "window.json"));
    CHECK(window["available"] == true);
    CHECK(window["window"]["gap_ratio"].get<double>() > 10);
  }

  TEST_CASE("qam outputs are byte-identical on rerun") {
    QuietLog quiet;
    const auto dir = scratch("qam_repeat");
    const auto cfg = writeConfig(dir, kSmallQam);
    checkRepeatable("qam-trajectories", cfg, dir / "traj");
    checkRepeatable("qam-success", cfg, dir / "success");
    checkRepeatable("qam-basins", cfg, dir / "basins");
    checkRepeatable("check-convergence", cfg, dir / "conv");
    CHECK(header(dir / "traj" / "a" / "trajectories.csv") == "trajectory,t,re_a,im_a,n,Q,assigned_lobe");
    CHECK(header(dir / "success" / "a" / "success.csv").rfind("n,m,mean_photon,trajectories,p_hat,stderr,baseline", 0) ==
          0);
    CHECK(csvRows(dir / "success" / "a" / "success.csv") == 1);
    CHECK(csvRows(dir / "basins" / "a" / "basins.csv") == 6);
  }

  TEST_CASE("thread count does not change trajectory output") {
    QuietLog quiet;
    const auto dir = scratch("threads");
    const auto cfg = writeConfig(dir, kSmallQam);
    REQUIRE(run({"qam-trajectories", "--config", cfg.string(), "--out", (dir / "a").string(), "--threads", "1"}) == 0);
    REQUIRE(run({"qam-trajectories", "--config", cfg.string(), "--out", (dir / "b").string(), "--threads", "3"}) == 0);
    CHECK(snapshot(dir / "a") == snapshot(dir / "b"));
  }

  TEST_CASE("exit codes") {
    QuietLog quiet;
    const auto dir = scratch("exit");
    const auto out = dir / "out";
    // Config errors.
    CHECK(runIn("qrc-run", writeConfig(dir, "[qrc]\nmodez = 3\n"), out) == 2);
    CHECK(runIn("qrc-run", writeConfig(dir, "[qrcc]\nmodes = 3\n"), out) == 2);
    CHECK(runIn("qrc-run", writeConfig(dir, "[qrc]\nmodes = three\n"), out) == 2);
    CHECK(runIn("qrc-run", writeConfig(dir, "[qrc]\nencoding = cubic\n"), out) == 2);
    CHECK(runIn("qam-steady", writeConfig(dir, "[qam]\nn = 0\n"), out) == 2);
    CHECK(run({"qrc-run", "--config", (dir / "missing.ini").string()}) == 2);
    CHECK(run({"qrc-run", "--threads", "x"}) == 2);
    CHECK(run(std::vector<std::string>{}) == 2);
    CHECK(run({"qrc-run", "qam-steady"}) == 2);
    CHECK(!fs::exists(out));
    // Numerical failure: ordinary least squares on constant features.
    CHECK(runIn("qrc-run", writeConfig(dir, "[split]\nwashout = 20\ntrain = 120\ntest = 40\n"
                                             "[qrc]\nmodes = 3\ninput_squeezing = 0\nlambda = 0\n"), out) == 3);
    // Physics preconditions: a cutoff pinned far too low.
    const auto small = writeConfig(dir, "[qam]\ncutoff = 6\n");
    CHECK(runIn("check-convergence", small, out) == 4);
    CHECK(runIn("qam-steady", small, out) == 4);
    CHECK(runIn("qam-steady", small, out, {"--force"}) == 0);
    // Lobes that overlap leave no metastable window.
    CHECK(runIn("qam-success", writeConfig(dir, "[qam]\nmin_cutoff = 12\n[success]\nm = 3\nmean_photon = 0.2\n"
                                                "trajectories = 2\n"),
                out) == 4);
  }

  TEST_CASE("help lists every key of the subcommand") {
    int code = -1;
    const auto qrc = captureHelp("qrc-sweep", code);
    CHECK(code == 0);
    for (const char* key : {"[split] washout", "[qrc] modes", "[qrc] noise_relative", "[sweep] realizations",
                            "[dataset] path", "[qrc] lambda"}) {
      CHECK_MESSAGE(qrc.find(key) != std::string::npos, key);
    }
    CHECK(qrc.find("[basins]") == std::string::npos);
    const auto basins = captureHelp("qam-basins", code);
    CHECK(code == 0);
    for (const char* key : {"[qam] n", "[qam] cutoff", "[window] measure_span", "[sampling] amp_high",
                            "[trajectories] dt", "[basins] radii", "[basins] trajectories_per_point"}) {
      CHECK_MESSAGE(basins.find(key) != std::string::npos, key);
    }
  }
}
