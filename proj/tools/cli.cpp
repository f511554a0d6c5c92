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

#include "cli.hpp"

#include "CLI11.hpp"
#include "qphot/config.hpp"
#include "qphot/data_io.hpp"
#include "qphot/errors.hpp"
#include "qphot/fock.hpp"
#include "qphot/gaussian.hpp"
#include "qphot/log.hpp"
#include "qphot/parallel.hpp"
#include "qphot/qam.hpp"
#include "qphot/qrc.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace qphot::cli {
namespace {

namespace fs = std::filesystem;
using io::Cell;
using io::Table;

struct KeySpec {
  std::string_view section;
  std::string_view key;
  std::string_view fallback;
  std::string_view help;
};

// Every accepted config key. Drives validation and the --help listings, so
// a key read below must appear here with the same default.
constexpr KeySpec kKeys[] = {
    {"dataset", "path", "", "series file, relative to the config; empty uses the synthetic series"},
    {"dataset", "format", "plain", "plain (one value per line) or csv"},
    {"dataset", "column", "0", "csv column, 0-based"},
    {"dataset", "synthetic_length", "auto", "synthetic series length (auto: split steps + 1)"},
    {"dataset", "synthetic_seed", "0", "synthetic series seed"},
    {"split", "washout", "300", "discarded leading steps"},
    {"split", "train", "3000", "training steps"},
    {"split", "test", "700", "test steps"},
    {"qrc", "modes", "12", "modes per pulse"},
    {"qrc", "input_squeezing", "0.75", "input squeezing strength"},
    {"qrc", "cavity_squeezing", "0", "cavity squeezing strength"},
    {"qrc", "encoding", "quarter", "input phase encoding: quarter, half, full, square"},
    {"qrc", "network_seed", "1", "crystal network seed"},
    {"qrc", "noise_relative", "0", "readout noise variance relative to the vacuum variance"},
    {"qrc", "noise_seed", "1", "readout noise seed"},
    {"qrc", "max_loop_gain", "0.97", "networks with a larger loop gain are redrawn"},
    {"qrc", "lambda", "auto", "ridge parameter; auto scales with the feature energy"},
    {"qrc", "trace_steps", "50", "steps written to correlations.csv"},
    {"sweep", "cavity_squeezing", "0, 0.75, 1.5", "cavity squeezing strengths"},
    {"sweep", "noise_relative", "0, 0.0002, 0.02, 0.2", "relative readout noise intensities"},
    {"sweep", "realizations", "20", "seeds per grid point"},
    {"qam", "n", "3", "drive order"},
    {"qam", "m", "4", "dissipation order"},
    {"qam", "detuning", "0.4", "detuning"},
    {"qam", "drive", "13.02", "drive strength"},
    {"qam", "mean_photon", "", "if set, overrides drive so the lobes hold this many photons"},
    {"qam", "gamma_m", "0.2", "nonlinear loss rate"},
    {"qam", "cutoff", "0", "fixed Fock cutoff; 0 selects one automatically"},
    {"qam", "min_cutoff", "32", "smallest automatic cutoff"},
    {"qam", "max_cutoff", "160", "largest automatic cutoff"},
    {"qam", "cutoff_growth", "1.5", "cutoff growth factor"},
    {"qam", "cutoff_tolerance", "1e-6", "population drift accepted at cutoff doubling"},
    {"qam", "dump_density", "false", "also write the steady-state density matrix"},
    {"wigner", "extent", "0", "half width of the square grid; 0 spans mean +- 4 sigma"},
    {"wigner", "points", "101", "grid points per axis"},
    {"spectrum", "count", "auto", "eigenvalues reported (auto: n + 3)"},
    {"window", "fast_efolds", "5", "fast-mode e-foldings before the window opens"},
    {"window", "slow_decay", "0.2", "metastable decay allowed before the window closes"},
    {"window", "warn_gap", "25", "gap ratios at or below this warn"},
    {"window", "measure_span", "10", "lobe assignment span after the window opens"},
    {"sampling", "amp_low", "0.5", "smallest initial displacement, in lobe amplitudes"},
    {"sampling", "amp_high", "1.5", "largest initial displacement, in lobe amplitudes"},
    {"sampling", "squeeze_max", "0.5", "largest initial squeezing"},
    {"trajectories", "count", "20", "trajectories"},
    {"trajectories", "dt", "0.05", "record step"},
    {"trajectories", "refinements", "12", "jump times resolved to dt / 2^refinements"},
    {"trajectories", "seed", "1", "trajectory seed"},
    {"trajectories", "t_max", "auto", "simulated time (auto: end of the measure window)"},
    {"trajectories", "initial_amplitude", "1.5", "initial displacement, in lobe amplitudes"},
    {"trajectories", "initial_phase", "1.0471975511965976", "initial displacement phase"},
    {"trajectories", "initial_squeezing", "0.5", "initial squeezing"},
    {"trajectories", "initial_squeezing_phase", "-0.47123889803846897", "initial squeezing phase"},
    {"trajectories", "master_equation", "false", "also write the master-equation solution"},
    {"success", "n", "3", "drive order"},
    {"success", "m", "3, 4", "dissipation orders"},
    {"success", "mean_photon", "8", "lobe photon numbers"},
    {"success", "trajectories", "200", "trajectories per setting"},
    {"success", "seed", "1", "seed"},
    {"basins", "radii", "0.6, 1.0, 1.4", "ring radii, in lobe amplitudes"},
    {"basins", "angles", "24", "points per ring"},
    {"basins", "trajectories_per_point", "3", "majority-vote trajectories per point"},
    {"basins", "seed", "1", "seed"},
};

struct Subcommand {
  std::string_view name;
  std::string_view description;
  std::vector<std::string_view> sections;
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> table = {
      {"qrc-run", "single reservoir forecast", {"dataset", "split", "qrc"}},
      {"qrc-sweep", "cavity squeezing x readout noise x seed grid", {"dataset", "split", "qrc", "sweep"}},
      {"qam-steady", "steady state, Wigner grid and Fock distribution", {"qam", "wigner"}},
      {"qam-spectrum", "Liouvillian eigenvalues and metastable window", {"qam", "spectrum", "window"}},
      {"qam-trajectories", "quantum-jump trajectories from one initial state",
       {"qam", "window", "sampling", "trajectories"}},
      {"qam-success", "retrieval success probabilities", {"qam", "window", "sampling", "trajectories", "success"}},
      {"qam-basins", "lobe assignment over a coherent-state grid",
       {"qam", "window", "sampling", "trajectories", "basins"}},
      {"check-convergence", "Fock cutoff convergence report", {"qam"}},
  };
  return table;
}

std::string_view fallbackFor(std::string_view section, std::string_view key) {
  for (const auto& k : kKeys) {
    if (k.section == section && k.key == key) return k.fallback;
  }
  throw std::logic_error(fmt::format("unregistered config key [{}] {}", section, key));
}

std::string keyHelp(const Subcommand& sub) {
  std::string out = "Config keys ([section] key = default):\n";
  for (auto section : sub.sections) {
    for (const auto& k : kKeys) {
      if (k.section != section) continue;
      out += fmt::format("  [{}] {} = {}\n      {}\n", k.section, k.key, k.fallback.empty() ? "(unset)" : k.fallback,
                         k.help);
    }
  }
  return out;
}

void validateKeys(const Config& config) {
  std::vector<std::string_view> sections;
  for (const auto& k : kKeys) {
    if (std::find(sections.begin(), sections.end(), k.section) == sections.end()) sections.push_back(k.section);
  }
  config.requireKnownSections(sections);
  for (auto section : sections) {
    std::vector<std::string_view> keys;
    for (const auto& k : kKeys) {
      if (k.section == section) keys.push_back(k.key);
    }
    config.requireKnownKeys(std::string(section), keys);
  }
}

// Typed reads with the registry default.
class Reader {
 public:
  explicit Reader(const Config& config) : config_(config) {}

  // The registry default is only parsed when the key is absent, so "auto"
  // style defaults never reach the number parser.
  double real(std::string_view s, std::string_view k) const {
    return present(s, k) ? config_.getDouble(std::string(s), std::string(k), 0.0)
                         : std::stod(std::string(fallbackFor(s, k)));
  }
  int integer(std::string_view s, std::string_view k) const {
    return present(s, k) ? config_.getInt(std::string(s), std::string(k), 0)
                         : std::stoi(std::string(fallbackFor(s, k)));
  }
  std::uint64_t seed(std::string_view s, std::string_view k) const {
    return present(s, k) ? config_.getUint(std::string(s), std::string(k), 0)
                         : std::stoull(std::string(fallbackFor(s, k)));
  }
  bool flag(std::string_view s, std::string_view k) const {
    return config_.getBool(std::string(s), std::string(k), fallbackFor(s, k) == "true");
  }
  std::string text(std::string_view s, std::string_view k) const {
    return config_.getString(std::string(s), std::string(k), std::string(fallbackFor(s, k)));
  }
  std::vector<double> reals(std::string_view s, std::string_view k) const {
    if (auto raw = config_.raw(std::string(s), std::string(k))) {
      return config_.getDoubleList(std::string(s), std::string(k), {});
    }
    Config tmp;
    tmp.set("x", "x", std::string(fallbackFor(s, k)));
    return tmp.getDoubleList("x", "x", {});
  }
  std::vector<int> integers(std::string_view s, std::string_view k) const {
    if (auto raw = config_.raw(std::string(s), std::string(k))) {
      return config_.getIntList(std::string(s), std::string(k), {});
    }
    Config tmp;
    tmp.set("x", "x", std::string(fallbackFor(s, k)));
    return tmp.getIntList("x", "x", {});
  }
  bool present(std::string_view s, std::string_view k) const {
    return config_.raw(std::string(s), std::string(k)).has_value();
  }
  // Set and not "auto".
  bool given(std::string_view s, std::string_view k) const {
    const auto raw = config_.raw(std::string(s), std::string(k));
    return raw && !raw->empty() && *raw != "auto";
  }

 private:
  const Config& config_;
};

struct Options {
  std::string config;
  std::string out = "out";
  std::uint64_t seed = 0;
  bool seedGiven = false;
  int threads = defaultThreadCount();
  bool force = false;
  bool verbose = false;
};

// Collects output files under one directory; the manifest lists them.
class Output {
 public:
  explicit Output(const fs::path& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw ConfigError(fmt::format("cannot create output directory {}", dir.string()));
  }
  void csv(const std::string& name, const Table& table) {
    io::writeCsv(table, dir_ / name);
    files_.push_back(name);
  }
  void json(const std::string& name, const nlohmann::json& value) {
    io::writeJson(value, dir_ / name);
    files_.push_back(name);
  }
  void manifest(std::string_view command, const Config& config, const nlohmann::json& seeds,
                std::string_view datasetHash) {
    auto m = io::makeManifest(command, config.toJson(), seeds, datasetHash);
    auto files = files_;
    std::sort(files.begin(), files.end());
    m["outputs"] = files;
    io::writeJson(m, dir_ / "manifest.json");
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

Cell num(double v) { return v; }
Cell num(int v) { return static_cast<std::int64_t>(v); }
Cell num(std::uint64_t v) { return static_cast<std::int64_t>(v); }

// ---- QRC ----

io::Split readSplit(const Reader& r) {
  io::Split s;
  s.washout = r.integer("split", "washout");
  s.train = r.integer("split", "train");
  s.test = r.integer("split", "test");
  if (s.washout < 0 || s.train < 1 || s.test < 1) throw ConfigError("split needs washout >= 0, train >= 1, test >= 1");
  return s;
}

qrc::ReservoirConfig readReservoir(const Reader& r) {
  qrc::ReservoirConfig c;
  c.modes = r.integer("qrc", "modes");
  c.inputSqueezing = r.real("qrc", "input_squeezing");
  c.cavitySqueezing = r.real("qrc", "cavity_squeezing");
  c.encoding = r.text("qrc", "encoding");
  c.networkSeed = r.seed("qrc", "network_seed");
  const double relative = r.real("qrc", "noise_relative");
  if (relative < 0) throw ConfigError("noise_relative must be >= 0");
  c.noiseVariance = qrc::noiseVarianceFromRelative(relative);
  c.noiseSeed = r.seed("qrc", "noise_seed");
  c.maxLoopGain = r.real("qrc", "max_loop_gain");
  c.validate();
  qrc::encodePhase(c.encoding, 0.0);
  return c;
}

std::optional<double> readLambda(const Reader& r) {
  if (!r.given("qrc", "lambda")) return std::nullopt;
  const double l = r.real("qrc", "lambda");
  if (l < 0) throw ConfigError("lambda must be >= 0");
  return l;
}

struct DatasetPlan {
  fs::path path;
  io::SeriesFormat format = io::SeriesFormat::PlainText;
  int column = 0;
  std::size_t syntheticLength = 0;
  std::uint64_t syntheticSeed = 0;
};

DatasetPlan readDataset(const Reader& r, const io::Split& split, const fs::path& baseDir) {
  DatasetPlan d;
  const auto path = r.text("dataset", "path");
  if (!path.empty()) d.path = fs::path(path).is_absolute() ? fs::path(path) : baseDir / path;
  const auto format = r.text("dataset", "format");
  if (format == "plain") {
    d.format = io::SeriesFormat::PlainText;
  } else if (format == "csv") {
    d.format = io::SeriesFormat::CsvColumn;
  } else {
    throw ConfigError(fmt::format("dataset format must be plain or csv, got '{}'", format));
  }
  d.column = r.integer("dataset", "column");
  if (d.column < 0) throw ConfigError("dataset column must be >= 0");
  d.syntheticLength = split.steps() + 1;
  if (r.given("dataset", "synthetic_length")) {
    const int len = r.integer("dataset", "synthetic_length");
    if (len < 1) throw ConfigError("synthetic_length must be positive");
    d.syntheticLength = static_cast<std::size_t>(len);
  }
  d.syntheticSeed = r.seed("dataset", "synthetic_seed");
  return d;
}

io::NormalizedSeries loadDataset(const DatasetPlan& d, const io::Split& split) {
  const io::TimeSeries raw = d.path.empty() ? io::syntheticChaoticSeries(d.syntheticLength, d.syntheticSeed)
                                            : io::loadSeries(d.path, d.format, d.column);
  split.validate(raw.values.size());
  // Fit on everything the training targets touch, nothing later.
  return io::normalizeMinMax01(raw, 0, static_cast<std::size_t>(split.washout + split.train + 1));
}

int runQrc(const Options& opt, const Config& config, const fs::path& baseDir) {
  const Reader r(config);
  const auto split = readSplit(r);
  const auto cfg = readReservoir(r);
  const auto lambda = readLambda(r);
  const auto plan = readDataset(r, split, baseDir);
  const int traceSteps = r.integer("qrc", "trace_steps");
  if (traceSteps < 0) throw ConfigError("trace_steps must be >= 0");

  const auto data = loadDataset(plan, split);
  log::info(fmt::format("series: {} values, hash {}", data.series.values.size(), data.series.hash));
  const auto res = qrc::santaFeExperiment(cfg, data.series.values, split, lambda, data.fit);

  Output out(opt.out);
  Table pred({"k", "target", "prediction"});
  const int first = split.washout + split.train;
  for (std::size_t i = 0; i < res.testPredictions.size(); ++i) {
    pred.addRow({num(first + static_cast<int>(i) + 1), res.testTargets[i], res.testPredictions[i]});
  }
  out.csv("predictions.csv", pred);

  if (traceSteps > 0) {
    const auto network = qrc::buildNetwork(cfg);
    const auto steps = std::min<std::size_t>(traceSteps, data.series.values.size());
    const std::span<const double> inputs(data.series.values.data(), steps);
    const auto rows = qrc::runIdealSequence(cfg, network.crystal, inputs, gaussian::vacuum(cfg.modes));
    std::vector<std::string> cols{"k", "input"};
    for (Eigen::Index c = 0; c < rows.cols(); ++c) cols.push_back(fmt::format("o{}", c));
    Table corr(cols);
    for (Eigen::Index k = 0; k < rows.rows(); ++k) {
      std::vector<Cell> row{num(static_cast<int>(k)), inputs[k]};
      for (Eigen::Index c = 0; c < rows.cols(); ++c) row.push_back(rows(k, c));
      corr.addRow(std::move(row));
    }
    out.csv("correlations.csv", corr);
  }

  nlohmann::json result = {
      {"train_nmse", res.trainNMSE},
      {"test_nmse", res.testNMSE},
      {"constant_test_nmse", res.constantTestNMSE},
      {"lambda", res.lambda},
      {"network_draw", res.networkDraw},
      {"modes", cfg.modes},
      {"input_squeezing_dB", gaussian::squeezingDecibels(cfg.inputSqueezing)},
      {"cavity_squeezing_dB", gaussian::squeezingDecibels(cfg.cavitySqueezing)},
      {"noise_relative_intensity", qrc::relativeNoiseIntensity(cfg.noiseVariance)},
      {"normalization", {{"lo", data.fit.lo}, {"hi", data.fit.hi}, {"clipped", data.clipped}}},
  };
  if (res.rawTestNMSE) result["raw_test_nmse"] = *res.rawTestNMSE;
  out.json("result.json", result);
  out.manifest("qrc-run", config, {{"network_seed", cfg.networkSeed}, {"noise_seed", cfg.noiseSeed}},
               data.series.hash);
  log::info(fmt::format("test NMSE {:.4g} (constant predictor {:.4g})", res.testNMSE, res.constantTestNMSE));
  return kOk;
}

int runSweep(const Options& opt, const Config& config, const fs::path& baseDir) {
  const Reader r(config);
  qrc::SweepSpec spec;
  spec.split = readSplit(r);
  spec.base = readReservoir(r);
  spec.lambda = readLambda(r);
  spec.cavitySqueezings = r.reals("sweep", "cavity_squeezing");
  spec.noiseRelativeIntensities = r.reals("sweep", "noise_relative");
  spec.realizations = r.integer("sweep", "realizations");
  spec.threads = opt.threads;
  if (spec.cavitySqueezings.empty() || spec.noiseRelativeIntensities.empty()) throw ConfigError("sweep grid is empty");
  if (spec.realizations < 1) throw ConfigError("realizations must be >= 1");
  for (double v : spec.noiseRelativeIntensities) {
    if (v < 0) throw ConfigError("noise_relative values must be >= 0");
  }
  const auto plan = readDataset(r, spec.split, baseDir);

  const auto data = loadDataset(plan, spec.split);
  const auto rows = qrc::runSweep(spec, data.series.values);

  Output out(opt.out);
  Table t({"cavity_squeezing_dB", "noise_relative_intensity", "seed", "train_nmse", "test_nmse"});
  for (const auto& row : rows) {
    t.addRow({gaussian::squeezingDecibels(row.cavitySqueezing), row.noiseRelativeIntensity, num(row.seed),
              row.trainNMSE, row.testNMSE});
  }
  out.csv("sweep.csv", t);
  out.manifest("qrc-sweep", config, {{"network_seed", spec.base.networkSeed}, {"noise_seed", spec.base.noiseSeed}},
               data.series.hash);
  return kOk;
}

// ---- QAM ----

fock::ResonatorParams readResonator(const Reader& r) {
  fock::ResonatorParams p;
  p.n = r.integer("qam", "n");
  p.m = r.integer("qam", "m");
  p.detuning = r.real("qam", "detuning");
  p.gammaM = r.real("qam", "gamma_m");
  p.drive = r.real("qam", "drive");
  if (r.given("qam", "mean_photon")) {
    const double target = r.real("qam", "mean_photon");
    if (!(target > 0)) throw ConfigError("mean_photon must be > 0");
    if (!(p.gammaM > 0)) throw ConfigError("mean_photon needs gamma_m > 0");
    p.drive = qam::driveForMeanPhoton(p.n, p.m, p.gammaM, target);
  }
  p.validate();
  return p;
}

fock::CutoffOptions readCutoff(const Reader& r) {
  fock::CutoffOptions o;
  o.minCutoff = r.integer("qam", "min_cutoff");
  o.maxCutoff = r.integer("qam", "max_cutoff");
  o.growth = r.real("qam", "cutoff_growth");
  o.tolerance = r.real("qam", "cutoff_tolerance");
  const int fixed = r.integer("qam", "cutoff");
  if (fixed < 0) throw ConfigError("cutoff must be >= 0");
  if (fixed > 0) o.minCutoff = o.maxCutoff = fixed;
  if (o.minCutoff < 2 || o.maxCutoff < o.minCutoff) throw ConfigError("need 2 <= min_cutoff <= max_cutoff");
  if (o.growth <= 1.0) throw ConfigError("cutoff_growth must exceed 1");
  if (!(o.tolerance > 0)) throw ConfigError("cutoff_tolerance must be > 0");
  return o;
}

qam::WindowOptions readWindow(const Reader& r) {
  qam::WindowOptions w;
  w.fastEfolds = r.real("window", "fast_efolds");
  w.slowDecay = r.real("window", "slow_decay");
  w.warnGap = r.real("window", "warn_gap");
  if (!(w.fastEfolds > 0) || !(w.slowDecay > 0 && w.slowDecay < 1)) {
    throw ConfigError("window needs fast_efolds > 0 and 0 < slow_decay < 1");
  }
  return w;
}

qam::PrepareOptions readPrepare(const Reader& r, bool force) {
  qam::PrepareOptions p;
  p.cutoff = readCutoff(r);
  p.window = readWindow(r);
  p.measureSpan = r.real("window", "measure_span");
  p.sampling.ampLow = r.real("sampling", "amp_low");
  p.sampling.ampHigh = r.real("sampling", "amp_high");
  p.sampling.squeezeMax = r.real("sampling", "squeeze_max");
  p.sampling.validate();
  p.trajectory.dt = r.real("trajectories", "dt");
  p.trajectory.refinements = r.integer("trajectories", "refinements");
  if (!(p.trajectory.dt > 0) || p.trajectory.refinements < 0 || p.trajectory.refinements > 40) {
    throw ConfigError("trajectories need dt > 0 and 0 <= refinements <= 40");
  }
  if (!(p.measureSpan > 0)) throw ConfigError("measure_span must be > 0");
  p.force = force;
  return p;
}

double photonEstimate(const fock::ResonatorParams& p) {
  if (p.drive == 0.0 || !(p.gammaM > 0)) return 0.0;
  try {
    const double b = qam::lobeAmplitude(p);
    return b * b;
  } catch (const Error&) {
    return 0.0;
  }
}

fock::CutoffReport acceptedCutoff(const fock::ResonatorParams& p, const fock::CutoffOptions& o, bool force) {
  auto rep = fock::selectCutoff(p, photonEstimate(p), o);
  if (!rep.converged) {
    const auto msg = fmt::format("cutoff not converged at D = {} (drift {:.3g}, tolerance {:.3g})", rep.cutoff,
                                 rep.drift, o.tolerance);
    if (!force) throw PhysicsError(msg);
    log::warn(msg + ", continuing as forced");
  }
  log::info(fmt::format("Fock cutoff D = {} (drift {:.3g})", rep.cutoff, rep.drift));
  return rep;
}

nlohmann::json cutoffJson(const fock::CutoffReport& rep) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& [d, drift] : rep.history) history.push_back({{"cutoff", d}, {"drift", drift}});
  return {{"cutoff", rep.cutoff}, {"drift", rep.drift}, {"converged", rep.converged}, {"history", history}};
}

nlohmann::json complexJson(fock::Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

nlohmann::json windowJson(const qam::MetastableWindow& w) {
  nlohmann::json eig = nlohmann::json::array();
  for (auto z : w.eigenvalues) eig.push_back(complexJson(z));
  return {{"t_start", w.tStart}, {"t_end", w.tEnd}, {"gap_ratio", w.gapRatio}, {"eigenvalues", eig}};
}

nlohmann::json qamSeeds() { return nlohmann::json::object(); }

int runSteady(const Options& opt, const Config& config) {
  const Reader r(config);
  const auto params = readResonator(r);
  const auto cutoffOpts = readCutoff(r);
  const bool dump = r.flag("qam", "dump_density");
  const double extent = r.real("wigner", "extent");
  const int points = r.integer("wigner", "points");
  if (extent < 0 || points < 2) throw ConfigError("wigner needs extent >= 0 and points >= 2");

  const auto rep = acceptedCutoff(params, cutoffOpts, opt.force);
  const fock::Liouvillian liouvillian(params, fock::FockSpace(rep.cutoff));
  const auto rho = fock::steadyState(liouvillian);
  const auto grid =
      extent > 0 ? fock::WignerGrid{-extent, extent, -extent, extent, points, points} : fock::autoGrid(rho, points);
  const auto w = fock::wigner(rho, grid);

  Output out(opt.out);
  Table wt({"x", "p", "W"});
  const auto xs = grid.xs();
  const auto ps = grid.ps();
  for (int i = 0; i < grid.xPoints; ++i) {
    for (int j = 0; j < grid.pPoints; ++j) wt.addRow({xs[i], ps[j], w(i, j)});
  }
  out.csv("wigner.csv", wt);
  Table ft({"k", "p_k"});
  const auto pops = fock::populations(rho);
  for (std::size_t k = 0; k < pops.size(); ++k) ft.addRow({num(static_cast<int>(k)), pops[k]});
  out.csv("fock.csv", ft);

  const double meanN = fock::meanPhoton(rho);
  const double symmetry = (fock::rotate(rho, 2 * std::numbers::pi / params.n) - rho).cwiseAbs().maxCoeff();
  nlohmann::json summary = {{"params", params.toJson()},
                            {"cutoff", cutoffJson(rep)},
                            {"mean_photon", meanN},
                            {"mean_a", complexJson(fock::expectA(rho))},
                            {"rotation_residual", symmetry},
                            {"wigner_extent", grid.xMax}};
  summary["mandel_q"] = meanN > 1e-12 ? nlohmann::json(fock::mandelQ(rho)) : nlohmann::json(nullptr);
  summary["lobe_amplitude"] = photonEstimate(params) > 0 ? nlohmann::json(qam::lobeAmplitude(params)) : nullptr;
  out.json("steady.json", summary);
  if (dump) out.json("density.json", fock::toJson(rho));
  out.manifest("qam-steady", config, qamSeeds(), "");
  return kOk;
}

int runSpectrum(const Options& opt, const Config& config) {
  const Reader r(config);
  const auto params = readResonator(r);
  const auto cutoffOpts = readCutoff(r);
  const auto windowOpts = readWindow(r);
  const int count = r.given("spectrum", "count") ? r.integer("spectrum", "count") : params.n + 3;
  if (count < 1) throw ConfigError("spectrum count must be >= 1");

  const auto rep = acceptedCutoff(params, cutoffOpts, opt.force);
  const fock::Liouvillian liouvillian(params, fock::FockSpace(rep.cutoff));
  const auto eig = fock::spectrum(liouvillian, std::max(count, params.n + 1));

  Output out(opt.out);
  Table t({"index", "re", "im", "sector"});
  for (int i = 0; i < count && i < static_cast<int>(eig.size()); ++i) {
    t.addRow({num(i + 1), eig[i].value.real(), eig[i].value.imag(), num(eig[i].sector)});
  }
  out.csv("spectrum.csv", t);
  nlohmann::json window = {{"cutoff", cutoffJson(rep)}, {"params", params.toJson()}};
  try {
    window["window"] = windowJson(qam::metastableWindow(eig, params.n, windowOpts));
    window["available"] = true;
  } catch (const PhysicsError& e) {
    window["available"] = false;
    window["reason"] = e.what();
    log::warn(e.what());
  }
  out.json("window.json", window);
  out.manifest("qam-spectrum", config, qamSeeds(), "");
  return kOk;
}

std::string channelName(int channel) { return channel == 0 ? "a" : "a^m"; }

int runTrajectories(const Options& opt, const Config& config) {
  const Reader r(config);
  const auto params = readResonator(r);
  const auto prepOpts = readPrepare(r, opt.force);
  const int count = r.integer("trajectories", "count");
  const auto seed = r.seed("trajectories", "seed");
  const double amp = r.real("trajectories", "initial_amplitude");
  const double phase = r.real("trajectories", "initial_phase");
  const double squeeze = r.real("trajectories", "initial_squeezing");
  const double squeezePhase = r.real("trajectories", "initial_squeezing_phase");
  const bool master = r.flag("trajectories", "master_equation");
  if (count < 1) throw ConfigError("trajectory count must be >= 1");
  if (amp < 0 || squeeze < 0) throw ConfigError("initial amplitude and squeezing must be >= 0");

  const auto prep = qam::prepare(params, prepOpts);
  const double tMax = r.given("trajectories", "t_max") ? r.real("trajectories", "t_max") : prep.measure.end;
  if (tMax < prep.measure.end) {
    throw ConfigError(fmt::format("t_max {} ends before the measure window ({})", tMax, prep.measure.end));
  }
  const fock::Complex beta = std::polar(amp * prep.amplitude, phase);
  const fock::Complex xi = std::polar(squeeze, squeezePhase);
  const double headroom =
      fock::squeezedCoherentMean(beta, xi) + 6 * std::sqrt(fock::squeezedCoherentVariance(beta, xi));
  const int cutoff = std::max(prep.trajectoryCutoff, static_cast<int>(std::ceil(headroom)) + 2);
  qam::LobeSet lobes = prep.lobes;
  for (auto& lobe : lobes.lobes) lobe.reference = fock::pad(lobe.reference, cutoff);
  const fock::FockSpace space(cutoff);
  const auto psi0 = fock::squeezedCoherent(beta, xi, space);
  const qam::TrajectorySimulator sim(params, space, prep.trajectory);

  std::vector<qam::TrajectoryRecord> records(count);
  parallelFor(records.size(), opt.threads, [&](std::size_t i) {
    auto rng = qam::trajectoryRng(seed, i);
    records[i] = sim.run(psi0, tMax, rng, &lobes, prep.measure);
  });

  Output out(opt.out);
  Table traj({"trajectory", "t", "re_a", "im_a", "n", "Q", "assigned_lobe"});
  Table jumps({"trajectory", "t", "operator"});
  Table summary({"trajectory", "apriori_lobe", "assigned_lobe", "phase_lobe", "jumps"});
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const int id = static_cast<int>(i);
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
      const double t = rec.times[k];
      const bool inside = t >= prep.measure.begin && t <= prep.measure.end;
      traj.addRow({num(id), t, rec.meanA[k].real(), rec.meanA[k].imag(), rec.meanN[k], rec.mandelQ[k],
                   num(inside ? rec.assignedLobe : -1)});
    }
    for (const auto& j : rec.jumps) jumps.addRow({num(id), j.time, channelName(j.channel)});
    summary.addRow({num(id), num(rec.aprioriLobe), num(rec.assignedLobe), num(qam::phaseLobe(rec, params.n)),
                    num(static_cast<int>(rec.jumps.size()))});
  }
  out.csv("trajectories.csv", traj);
  out.csv("jumps.csv", jumps);
  out.csv("summary.csv", summary);

  if (master) {
    const fock::Liouvillian liouvillian(params, space);
    const auto& times = records.front().times;
    const auto states = fock::evolve(fock::projector(psi0), liouvillian, times);
    Table ens({"t", "re_a", "im_a", "n", "Q"});
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double n = fock::meanPhoton(states[k]);
      const auto a = fock::expectA(states[k]);
      ens.addRow({times[k], a.real(), a.imag(), n,
                  n > 1e-12 ? fock::mandelQ(states[k]) : std::numeric_limits<double>::quiet_NaN()});
    }
    out.csv("ensemble.csv", ens);
  }
  out.json("window.json", {{"window", windowJson(prep.window)},
                           {"measure", {{"begin", prep.measure.begin}, {"end", prep.measure.end}}},
                           {"cutoff", cutoffJson(prep.cutoff)},
                           {"trajectory_cutoff", cutoff},
                           {"lobe_amplitude", prep.amplitude}});
  out.manifest("qam-trajectories", config, {{"trajectories", seed}}, "");
  return kOk;
}

int runSuccess(const Options& opt, const Config& config) {
  const Reader r(config);
  qam::SuccessSpec spec;
  spec.n = r.integer("success", "n");
  spec.ms = r.integers("success", "m");
  spec.meanPhotons = r.reals("success", "mean_photon");
  spec.trajectories = r.integer("success", "trajectories");
  spec.seed = r.seed("success", "seed");
  spec.detuning = r.real("qam", "detuning");
  spec.gammaM = r.real("qam", "gamma_m");
  spec.threads = opt.threads;
  spec.prepare = readPrepare(r, opt.force);
  if (spec.ms.empty() || spec.meanPhotons.empty()) throw ConfigError("success grid is empty");
  if (spec.trajectories < 1) throw ConfigError("success trajectories must be >= 1");
  if (!(spec.gammaM > 0)) throw ConfigError("success needs gamma_m > 0");
  for (int m : spec.ms) {
    fock::ResonatorParams p{spec.n, m, spec.detuning, 1.0, spec.gammaM};
    p.validate();
    if (2 * m <= spec.n) throw ConfigError(fmt::format("success needs 2m > n (m = {})", m));
  }
  for (double mp : spec.meanPhotons) {
    if (!(mp > 0)) throw ConfigError("mean_photon values must be > 0");
  }

  const auto results = qam::successExperiment(spec);

  Output out(opt.out);
  Table t({"n", "m", "mean_photon", "trajectories", "p_hat", "stderr", "baseline", "successes", "phase_agreement",
           "drive", "cutoff", "gap_ratio", "status"});
  int skipped = 0;
  for (const auto& res : results) {
    const bool ok = !res.skipped;
    skipped += ok ? 0 : 1;
    t.addRow({num(res.params.n), num(res.params.m), res.meanPhoton, num(res.trajectories), res.pHat,
              res.standardError, res.baseline, num(res.successes), res.phaseAgreement, res.params.drive,
              num(res.cutoff), res.window.gapRatio, ok ? std::string("ok") : "skipped: " + *res.skipped});
  }
  out.csv("success.csv", t);
  out.manifest("qam-success", config, {{"success", spec.seed}}, "");
  if (skipped > 0) {
    log::error(fmt::format("{} of {} settings skipped (see success.csv)", skipped, results.size()));
    return kPhysics;
  }
  return kOk;
}

int runBasins(const Options& opt, const Config& config) {
  const Reader r(config);
  const auto params = readResonator(r);
  const auto prepOpts = readPrepare(r, opt.force);
  qam::BasinSpec spec;
  spec.radii = r.reals("basins", "radii");
  spec.angles = r.integer("basins", "angles");
  spec.trajectoriesPerPoint = r.integer("basins", "trajectories_per_point");
  spec.seed = r.seed("basins", "seed");
  spec.threads = opt.threads;
  if (spec.radii.empty() || spec.angles < 1 || spec.trajectoriesPerPoint < 1) {
    throw ConfigError("basins need radii, angles >= 1 and trajectories_per_point >= 1");
  }

  const auto prep = qam::prepare(params, prepOpts);
  const auto points = qam::basinMap(prep, spec);

  Output out(opt.out);
  Table t({"re_alpha", "im_alpha", "assigned_lobe", "votes"});
  for (const auto& p : points) t.addRow({p.alpha.real(), p.alpha.imag(), num(p.assignedLobe), num(p.votes)});
  out.csv("basins.csv", t);
  out.json("basins.json", {{"contiguous", qam::basinsContiguous(points, spec.angles, params.n)},
                           {"lobe_amplitude", prep.amplitude},
                           {"window", windowJson(prep.window)},
                           {"cutoff", cutoffJson(prep.cutoff)},
                           {"trajectory_cutoff", prep.trajectoryCutoff}});
  out.manifest("qam-basins", config, {{"basins", spec.seed}}, "");
  return kOk;
}

int runConvergence(const Options& opt, const Config& config) {
  const Reader r(config);
  const auto params = readResonator(r);
  const auto cutoffOpts = readCutoff(r);

  const auto rep = fock::selectCutoff(params, photonEstimate(params), cutoffOpts);
  Output out(opt.out);
  Table t({"cutoff", "drift"});
  for (const auto& [d, drift] : rep.history) t.addRow({num(d), drift});
  out.csv("convergence.csv", t);
  auto report = cutoffJson(rep);
  report["tolerance"] = cutoffOpts.tolerance;
  report["max_cutoff"] = cutoffOpts.maxCutoff;
  report["params"] = params.toJson();
  out.json("convergence.json", report);
  out.manifest("check-convergence", config, qamSeeds(), "");
  if (!rep.converged) {
    log::error(fmt::format("not converged: drift {:.3g} at D = {} (max {})", rep.drift, rep.cutoff,
                           cutoffOpts.maxCutoff));
    return kPhysics;
  }
  std::cerr << fmt::format("converged at D = {} (drift {:.3g})\n", rep.cutoff, rep.drift);
  return kOk;
}

int dispatch(std::string_view name, const Options& opt) {
  Config config;
  fs::path baseDir = ".";
  if (!opt.config.empty()) {
    config = Config::fromFile(opt.config);
    baseDir = fs::path(opt.config).parent_path();
  }
  validateKeys(config);
  if (opt.seedGiven) {
    const auto s = std::to_string(opt.seed);
    constexpr std::pair<const char*, const char*> kSeedKeys[] = {
        {"qrc", "network_seed"}, {"qrc", "noise_seed"}, {"trajectories", "seed"}, {"success", "seed"}, {"basins", "seed"}};
    for (const auto& [section, key] : kSeedKeys) config.set(section, key, s);
  }
  if (opt.threads < 1) throw ConfigError("--threads must be >= 1");

  if (name == "qrc-run") return runQrc(opt, config, baseDir);
  if (name == "qrc-sweep") return runSweep(opt, config, baseDir);
  if (name == "qam-steady") return runSteady(opt, config);
  if (name == "qam-spectrum") return runSpectrum(opt, config);
  if (name == "qam-trajectories") return runTrajectories(opt, config);
  if (name == "qam-success") return runSuccess(opt, config);
  if (name == "qam-basins") return runBasins(opt, config);
  if (name == "check-convergence") return runConvergence(opt, config);
  throw ConfigError(fmt::format("unknown subcommand {}", name));
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Quantum photonic reservoir and associative-memory experiments"};
  app.require_subcommand(1);
  Options opt;
  for (const auto& sub : subcommands()) {
    auto* cmd = app.add_subcommand(std::string(sub.name), std::string(sub.description));
    cmd->add_option("--config", opt.config, "INI or JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--out", opt.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", opt.seed, "override every seed in the config");
    cmd->add_option("--threads", opt.threads, "worker threads")->capture_default_str();
    cmd->add_flag("--force", opt.force, "continue with an unconverged Fock cutoff");
    cmd->add_flag("--verbose", opt.verbose, "progress on standard error");
    cmd->footer(keyHelp(sub));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  std::string name;
  for (const auto* sub : app.get_subcommands()) name = sub->get_name();
  opt.seedGiven = app.get_subcommand(name)->count("--seed") > 0;

  const auto previous = log::level();
  log::setLevel(opt.verbose ? log::Level::Info : std::max(previous, log::Level::Warn));
  int code = kOk;
  try {
    code = dispatch(name, opt);
  } catch (const ConfigError& e) {
    log::error(fmt::format("config error: {}", e.what()));
    code = kConfig;
  } catch (const PhysicsError& e) {
    log::error(fmt::format("physics precondition failed: {}", e.what()));
    code = kPhysics;
  } catch (const NumericalError& e) {
    log::error(fmt::format("numerical failure: {}", e.what()));
    code = kNumerical;
  } catch (const std::exception& e) {
    log::error(fmt::format("failure: {}", e.what()));
    code = kNumerical;
  }
  log::setLevel(previous);
  return code;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"qphot"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qphot::cli
