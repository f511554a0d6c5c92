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

// Loop-based Gaussian quantum reservoir: a multimode pulse circulates through
// a squeezing crystal and meets a fresh squeezed input pulse on a 50:50
// coupler every round trip. The coupler's output arm is read out by
// homodyne detection of the x quadratures; a ridge-trained linear layer maps
// the measured moments to the forecast.

#pragma once

#include "qphot/data_io.hpp"
#include "qphot/gaussian.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qphot::qrc {

using gaussian::GaussianState;
using gaussian::Matrix;
using gaussian::Symplectic;
using gaussian::Vector;

/// Named input encodings s -> phi:
///   quarter  phi = pi s / 4   (default)
///   half     phi = pi s / 2
///   full     phi = pi s
///   square   phi = pi s^2 / 2
double encodePhase(std::string_view preset, double input);
std::vector<std::string> encodingPresets();

struct ReservoirConfig {
  int modes = 12;
  double inputSqueezing = 0.75;
  double cavitySqueezing = 0.0;
  std::string encoding = "quarter";
  std::uint64_t networkSeed = 1;
  double noiseVariance = 0.0;
  std::uint64_t noiseSeed = 1;
  /// Networks whose loop map has a larger spectral radius are redrawn.
  double maxLoopGain = 0.97;

  void validate() const;
};

/// s_noise^2 relative to the vacuum variance 1/2.
double relativeNoiseIntensity(double noiseVariance);
double noiseVarianceFromRelative(double relativeIntensity);

/// Spectral radius of the round-trip map crystal / sqrt(2).
double loopGain(const Symplectic& crystal);

struct Network {
  Symplectic crystal;
  std::uint64_t draw = 0;
  double loopGain = 0.0;
};

/// Draws crystalSymplectic(modes, cavitySqueezing, networkSeed, draw) for
/// draw = 0, 1, ... and keeps the first with loopGain < maxLoopGain.
Network buildNetwork(const ReservoirConfig& cfg, std::uint64_t maxDraws = 100000);

struct StepResult {
  GaussianState loop;
  Vector observables;
};

/// One round trip. Modes [0, N) of the coupler output continue through the
/// crystal as the new loop state; modes [N, 2N) are measured.
StepResult stepReservoir(const GaussianState& loop, double input, const ReservoirConfig& cfg,
                         const Symplectic& crystal);

/// O_meas = O_ideal + u, u ~ N(0, variance) per entry.
Vector addReadoutNoise(const Vector& ideal, double variance, std::mt19937_64& rng);

/// Noiseless observable rows (one per input) starting from `initialLoop`.
Matrix runIdealSequence(const ReservoirConfig& cfg, const Symplectic& crystal, std::span<const double> inputs,
                        const GaussianState& initialLoop);

/// Adds readout noise to every row, drawing from mt19937_64(seed) row by row.
Matrix addNoiseRows(Matrix rows, double variance, std::uint64_t seed);

/// Full run from a vacuum loop with cfg's network and noise seeds.
Matrix runSequence(const ReservoirConfig& cfg, std::span<const double> inputs);

struct TrainedReadout {
  Vector weights;
  double bias = 0.0;
  double lambda = 0.0;

  std::vector<double> predict(const Matrix& rows) const;
};

/// 1e-9 * trace(X^T X) / features over the given rows.
double defaultRidge(const Matrix& rows);

/// Ridge regression with an unregularized bias on rows [washout, end).
/// lambda defaults to defaultRidge of those rows; lambda = 0 is ordinary
/// least squares and fails on rank-deficient rows.
TrainedReadout trainReadout(const Matrix& rows, std::span<const double> targets, int washout,
                            std::optional<double> lambda = std::nullopt);

/// <(y - ybar)^2> / <ybar^2>.
double nmse(std::span<const double> predictions, std::span<const double> targets);

struct ForecastResult {
  double trainNMSE = 0.0;
  double testNMSE = 0.0;
  /// Test NMSE of the constant predictor equal to the mean training target.
  double constantTestNMSE = 0.0;
  /// Test NMSE after mapping predictions and targets back to raw units;
  /// only set when a normalization fit is supplied.
  std::optional<double> rawTestNMSE;
  std::vector<double> testPredictions;
  std::vector<double> testTargets;
  ReservoirConfig config;
  std::uint64_t networkDraw = 0;
  double lambda = 0.0;
};

/// One-step-ahead forecast of a normalized series: input s_k, target s_{k+1}.
ForecastResult santaFeExperiment(const ReservoirConfig& cfg, std::span<const double> series, const io::Split& split,
                                 std::optional<double> lambda = std::nullopt,
                                 std::optional<io::MinMaxFit> fit = std::nullopt);

/// Realization r uses networkSeed + r and noiseSeed + r.
std::vector<ForecastResult> repeatedRealizations(const ReservoirConfig& cfg, std::span<const double> series,
                                                 const io::Split& split, int realizations,
                                                 std::optional<double> lambda = std::nullopt, int threads = 1);

struct SweepSpec {
  ReservoirConfig base;
  std::vector<double> cavitySqueezings;
  std::vector<double> noiseRelativeIntensities;
  int realizations = 20;
  io::Split split;
  std::optional<double> lambda;
  int threads = 1;
};

struct SweepRow {
  double cavitySqueezing = 0.0;
  double noiseRelativeIntensity = 0.0;
  int realization = 0;
  std::uint64_t seed = 0;
  double trainNMSE = 0.0;
  double testNMSE = 0.0;
};

/// Grid over cavity squeezing x noise intensity x realization, ordered in
/// that nesting. Noiseless observables are shared across noise levels, and
/// realization r reuses the same noise seed at every grid point.
std::vector<SweepRow> runSweep(const SweepSpec& spec, std::span<const double> series);

}  // namespace qphot::qrc
