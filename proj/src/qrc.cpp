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

#include "qphot/qrc.hpp"

#include "qphot/errors.hpp"
#include "qphot/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <numeric>

namespace qphot::qrc {
namespace {

struct Preset {
  const char* name;
  double (*phase)(double);
};

constexpr Preset kPresets[] = {
    {"quarter", [](double s) { return std::numbers::pi * s / 4.0; }},
    {"half", [](double s) { return std::numbers::pi * s / 2.0; }},
    {"full", [](double s) { return std::numbers::pi * s; }},
    {"square", [](double s) { return std::numbers::pi * s * s / 2.0; }},
};

const Preset& findPreset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (name == p.name) return p;
  }
  std::string known;
  for (const auto& p : kPresets) known += std::string(known.empty() ? "" : ", ") + p.name;
  throw ConfigError("unknown encoding '" + std::string(name) + "' (known: " + known + ")");
}

const Symplectic& cachedBeamSplitter(int modes) {
  thread_local std::vector<std::optional<Symplectic>> cache;
  if (cache.size() <= static_cast<std::size_t>(modes)) cache.resize(modes + 1);
  auto& slot = cache[modes];
  if (!slot) slot = gaussian::beamSplitter5050(modes);
  return *slot;
}

std::vector<int> modeRange(int begin, int end) {
  std::vector<int> out(end - begin);
  std::iota(out.begin(), out.end(), begin);
  return out;
}

// Train on rows [0, washout + train), test on the remaining rows.
ForecastResult evaluate(const Matrix& rows, std::span<const double> targets, const io::Split& split,
                        std::optional<double> lambda, const std::optional<io::MinMaxFit>& fit) {
  const auto trainEnd = static_cast<Eigen::Index>(split.washout + split.train);
  const auto testLen = static_cast<Eigen::Index>(split.test);
  const TrainedReadout readout = trainReadout(rows.topRows(trainEnd), targets.first(trainEnd), split.washout, lambda);

  ForecastResult result;
  result.lambda = readout.lambda;
  const auto trainTargets = targets.subspan(split.washout, split.train);
  const auto trainPred = readout.predict(rows.middleRows(split.washout, split.train));
  result.trainNMSE = nmse(trainPred, trainTargets);

  if (testLen > 0) {
    const auto testTargets = targets.subspan(trainEnd, testLen);
    result.testPredictions = readout.predict(rows.middleRows(trainEnd, testLen));
    result.testTargets.assign(testTargets.begin(), testTargets.end());
    result.testNMSE = nmse(result.testPredictions, testTargets);
    const double mean = std::accumulate(trainTargets.begin(), trainTargets.end(), 0.0) / trainTargets.size();
    const std::vector<double> constant(testLen, mean);
    result.constantTestNMSE = nmse(constant, testTargets);
    if (fit) {
      std::vector<double> rawPred(testLen), rawTarget(testLen);
      for (Eigen::Index k = 0; k < testLen; ++k) {
        rawPred[k] = fit->invert(result.testPredictions[k]);
        rawTarget[k] = fit->invert(result.testTargets[k]);
      }
      result.rawTestNMSE = nmse(rawPred, rawTarget);
    }
  }
  return result;
}

}  // namespace

double encodePhase(std::string_view preset, double input) { return findPreset(preset).phase(input); }

std::vector<std::string> encodingPresets() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

void ReservoirConfig::validate() const {
  if (modes < 1) throw ConfigError("reservoir needs at least one mode");
  if (inputSqueezing < 0.0) throw ConfigError("input squeezing must be >= 0");
  if (cavitySqueezing < 0.0) throw ConfigError("cavity squeezing must be >= 0");
  if (noiseVariance < 0.0) throw ConfigError("noise variance must be >= 0");
  if (!(maxLoopGain > 0.0 && maxLoopGain <= 1.0)) throw ConfigError("max loop gain must lie in (0, 1]");
  findPreset(encoding);
}

double relativeNoiseIntensity(double noiseVariance) { return noiseVariance / gaussian::kVacuumVariance; }

double noiseVarianceFromRelative(double relativeIntensity) { return relativeIntensity * gaussian::kVacuumVariance; }

double loopGain(const Symplectic& crystal) {
  Eigen::EigenSolver<Matrix> eig(crystal.matrix(), false);
  return eig.eigenvalues().cwiseAbs().maxCoeff() / std::numbers::sqrt2;
}

Network buildNetwork(const ReservoirConfig& cfg, std::uint64_t maxDraws) {
  cfg.validate();
  for (std::uint64_t draw = 0; draw < maxDraws; ++draw) {
    Symplectic s = gaussian::crystalSymplectic(cfg.modes, cfg.cavitySqueezing, cfg.networkSeed, draw);
    const double gain = loopGain(s);
    if (gain < cfg.maxLoopGain) return Network{std::move(s), draw, gain};
  }
  throw PhysicsError("no network with loop gain below " + std::to_string(cfg.maxLoopGain) + " in " +
                     std::to_string(maxDraws) + " draws");
}

StepResult stepReservoir(const GaussianState& loop, double input, const ReservoirConfig& cfg,
                         const Symplectic& crystal) {
  const int n = cfg.modes;
  if (loop.modes() != n || crystal.modes() != n) {
    throw ConfigError("reservoir has " + std::to_string(n) + " modes, loop state " + std::to_string(loop.modes()) +
                      ", crystal " + std::to_string(crystal.modes()));
  }
  const auto pulse = gaussian::squeezedInputState(n, {cfg.inputSqueezing, encodePhase(cfg.encoding, input)});
  const auto mixed = gaussian::applySymplectic(gaussian::tensorProduct(loop, pulse), cachedBeamSplitter(n));
  const auto loopArm = modeRange(0, n);
  const auto outArm = modeRange(n, 2 * n);
  return StepResult{gaussian::applySymplectic(gaussian::partialTrace(mixed, loopArm), crystal),
                    gaussian::homodyneMoments(gaussian::partialTrace(mixed, outArm))};
}

Vector addReadoutNoise(const Vector& ideal, double variance, std::mt19937_64& rng) {
  if (variance < 0.0) throw ConfigError("noise variance must be >= 0");
  if (variance == 0.0) return ideal;
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  Vector out = ideal;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += normal(rng);
  return out;
}

Matrix runIdealSequence(const ReservoirConfig& cfg, const Symplectic& crystal, std::span<const double> inputs,
                        const GaussianState& initialLoop) {
  if (inputs.empty()) throw ConfigError("input sequence is empty");
  Matrix rows(static_cast<Eigen::Index>(inputs.size()), gaussian::observableCount(cfg.modes));
  GaussianState loop = initialLoop;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    StepResult step = stepReservoir(loop, inputs[k], cfg, crystal);
    rows.row(static_cast<Eigen::Index>(k)) = step.observables.transpose();
    loop = std::move(step.loop);
  }
  return rows;
}

Matrix addNoiseRows(Matrix rows, double variance, std::uint64_t seed) {
  if (variance < 0.0) throw ConfigError("noise variance must be >= 0");
  if (variance == 0.0) return rows;
  std::mt19937_64 rng(seed);
  for (Eigen::Index k = 0; k < rows.rows(); ++k) {
    rows.row(k) = addReadoutNoise(rows.row(k).transpose(), variance, rng).transpose();
  }
  return rows;
}

Matrix runSequence(const ReservoirConfig& cfg, std::span<const double> inputs) {
  const Network net = buildNetwork(cfg);
  return addNoiseRows(runIdealSequence(cfg, net.crystal, inputs, gaussian::vacuum(cfg.modes)), cfg.noiseVariance,
                      cfg.noiseSeed);
}

std::vector<double> TrainedReadout::predict(const Matrix& rows) const {
  if (rows.cols() != weights.size()) throw ConfigError("readout expects " + std::to_string(weights.size()) + " features");
  const Vector y = (rows * weights).array() + bias;
  return {y.data(), y.data() + y.size()};
}

double defaultRidge(const Matrix& rows) {
  if (rows.cols() == 0) return 0.0;
  return 1e-9 * rows.squaredNorm() / static_cast<double>(rows.cols());
}

TrainedReadout trainReadout(const Matrix& rows, std::span<const double> targets, int washout,
                            std::optional<double> lambda) {
  if (static_cast<std::size_t>(rows.rows()) != targets.size()) throw ConfigError("rows and targets are not aligned");
  if (washout < 0 || washout >= rows.rows()) throw ConfigError("washout must be shorter than the training rows");
  if (lambda && *lambda < 0.0) throw ConfigError("ridge parameter must be >= 0");

  const Eigen::Index count = rows.rows() - washout;
  const Matrix x = rows.bottomRows(count);
  const Vector y = Eigen::Map<const Vector>(targets.data() + washout, count);

  const Eigen::RowVectorXd xMean = x.colwise().mean();
  const double yMean = y.mean();
  const Matrix xc = x.rowwise() - xMean;
  const Vector yc = y.array() - yMean;

  TrainedReadout out;
  out.lambda = lambda.value_or(defaultRidge(x));
  if (out.lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(xc);
    if (qr.rank() < xc.cols()) throw NumericalError("readout system is singular (rank-deficient rows, lambda = 0)");
    out.weights = qr.solve(yc);
  } else {
    Matrix gram = xc.transpose() * xc;
    gram.diagonal().array() += out.lambda;
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("ridge normal equations are not positive definite");
    out.weights = llt.solve(xc.transpose() * yc);
  }
  if (!out.weights.allFinite()) throw NumericalError("readout weights are not finite");
  out.bias = yMean - xMean.dot(out.weights);
  return out;
}

double nmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size() || targets.empty()) {
    throw ConfigError("nmse needs equal, non-zero lengths");
  }
  double err = 0.0;
  double norm = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double d = predictions[k] - targets[k];
    err += d * d;
    norm += targets[k] * targets[k];
  }
  if (norm == 0.0) throw ConfigError("nmse undefined for all-zero targets");
  return err / norm;
}

ForecastResult santaFeExperiment(const ReservoirConfig& cfg, std::span<const double> series, const io::Split& split,
                                 std::optional<double> lambda, std::optional<io::MinMaxFit> fit) {
  split.validate(series.size());
  const auto steps = split.steps();
  const Network net = buildNetwork(cfg);
  const Matrix rows = addNoiseRows(
      runIdealSequence(cfg, net.crystal, series.first(steps), gaussian::vacuum(cfg.modes)), cfg.noiseVariance,
      cfg.noiseSeed);
  ForecastResult result = evaluate(rows, series.subspan(1, steps), split, lambda, fit);
  result.config = cfg;
  result.networkDraw = net.draw;
  return result;
}

std::vector<ForecastResult> repeatedRealizations(const ReservoirConfig& cfg, std::span<const double> series,
                                                 const io::Split& split, int realizations,
                                                 std::optional<double> lambda, int threads) {
  if (realizations < 1) throw ConfigError("need at least one realization");
  std::vector<ForecastResult> out(realizations);
  parallelFor(out.size(), threads, [&](std::size_t r) {
    ReservoirConfig c = cfg;
    c.networkSeed += r;
    c.noiseSeed += r;
    out[r] = santaFeExperiment(c, series, split, lambda);
  });
  return out;
}

std::vector<SweepRow> runSweep(const SweepSpec& spec, std::span<const double> series) {
  spec.base.validate();
  spec.split.validate(series.size());
  if (spec.realizations < 1) throw ConfigError("need at least one realization");
  if (spec.cavitySqueezings.empty() || spec.noiseRelativeIntensities.empty()) {
    throw ConfigError("sweep needs at least one cavity squeezing and one noise intensity");
  }
  for (double rel : spec.noiseRelativeIntensities) {
    if (rel < 0.0) throw ConfigError("noise intensities must be >= 0");
  }
  const std::size_t nc = spec.cavitySqueezings.size();
  const std::size_t nn = spec.noiseRelativeIntensities.size();
  const auto nr = static_cast<std::size_t>(spec.realizations);
  const auto steps = spec.split.steps();
  const auto inputs = series.first(steps);
  const auto targets = series.subspan(1, steps);

  std::vector<SweepRow> rows(nc * nn * nr);
  parallelFor(nc * nr, spec.threads, [&](std::size_t task) {
    const std::size_t c = task / nr;
    const std::size_t r = task % nr;
    ReservoirConfig cfg = spec.base;
    cfg.cavitySqueezing = spec.cavitySqueezings[c];
    cfg.networkSeed += r;
    cfg.noiseSeed += r;
    const Network net = buildNetwork(cfg);
    const Matrix ideal = runIdealSequence(cfg, net.crystal, inputs, gaussian::vacuum(cfg.modes));
    for (std::size_t n = 0; n < nn; ++n) {
      const double rel = spec.noiseRelativeIntensities[n];
      const Matrix noisy = addNoiseRows(ideal, noiseVarianceFromRelative(rel), cfg.noiseSeed);
      const ForecastResult fr = evaluate(noisy, targets, spec.split, spec.lambda, std::nullopt);
      rows[(c * nn + n) * nr + r] =
          SweepRow{cfg.cavitySqueezing, rel, static_cast<int>(r), cfg.noiseSeed, fr.trainNMSE, fr.testNMSE};
    }
  });
  return rows;
}

}  // namespace qphot::qrc
