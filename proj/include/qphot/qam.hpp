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


// Associative-memory experiments on the driven resonator: lobe geometry,
// metastable windows, quantum-jump trajectories, lobe assignment and the
// retrieval-success and basin protocols built on them.

#pragma once

#include "qphot/fock.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace qphot::qam {

using fock::CMatrix;
using fock::Complex;
using fock::CVector;
using fock::ResonatorParams;

/// |beta| = (2 n eta / (m gamma_m))^(1 / (2m - n)).
double lobeAmplitude(const ResonatorParams& params);
/// Drive strength that puts |beta|^2 at the requested mean photon number.
double driveForMeanPhoton(int n, int m, double gammaM, double meanPhoton);
/// theta_j = (2j + 1) pi / n.
double lobePhase(int j, int n);

struct WindowOptions {
  /// Fast modes must have decayed by this many e-foldings at tStart.
  double fastEfolds = 5.0;
  /// Metastable modes may have decayed by at most this fraction at tEnd.
  double slowDecay = 0.2;
  /// Gap ratios at or below this only warn.
  double warnGap = 25.0;
};

struct MetastableWindow {
  double tStart = 0.0;
  double tEnd = 0.0;
  /// |Re lambda_{n+1}| / max_{2<=j<=n} |Re lambda_j|.
  double gapRatio = 0.0;
  std::vector<Complex> eigenvalues;
};

/// Throws PhysicsError when tStart >= tEnd.
MetastableWindow metastableWindow(const fock::Liouvillian& liouvillian, const WindowOptions& options = {});
/// Same, from an already computed spectrum (at least n + 1 entries).
MetastableWindow metastableWindow(const std::vector<fock::Eigenpair>& spectrum, int n,
                                  const WindowOptions& options = {});

struct Lobe {
  double phase = 0.0;
  CMatrix reference;
  double mandelQ = 0.0;
  Complex meanA;
};

struct LobeSet {
  int n = 0;
  double amplitude = 0.0;
  std::vector<Lobe> lobes;
  int cutoff() const { return lobes.empty() ? 0 : static_cast<int>(lobes.front().reference.rows()); }
};

/// Evolves |amplitude e^{i theta_j}> to window.tStart and pads the result to
/// `cutoff` (0 keeps the Liouvillian's). Throws PhysicsError if a reference
/// is still moving (trace distance to its state at 2 tStart above 0.05).
LobeSet buildLobeSet(const fock::Liouvillian& liouvillian, const MetastableWindow& window, int cutoff = 0);

/// <psi| rho_j |psi> for every lobe.
std::vector<double> lobeFidelities(const CVector& psi, const LobeSet& lobes);

/// argmax over lobes; ties (relative 1e-12) go to the smallest index and are
/// logged.
int argmaxLobe(const std::vector<double>& scores, const char* context);

int aprioriLobe(const CVector& psi0, const LobeSet& lobes);

/// Lobe whose phase sector contains arg(a).
int nearestPhaseLobe(Complex meanA, int n);

struct JumpEvent {
  double time = 0.0;
  /// 0 for a, 1 for a^m.
  int channel = 0;
};

/// Part of the record used for lobe assignment.
struct MeasureWindow {
  double begin = 0.0;
  double end = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Complex> meanA;
  std::vector<double> meanN;
  /// NaN where the state is the vacuum.
  std::vector<double> mandelQ;
  std::vector<JumpEvent> jumps;
  /// Lobe fidelities at each recorded time inside the measure window.
  std::vector<std::size_t> windowRows;
  std::vector<std::vector<double>> fidelities;
  int aprioriLobe = -1;
  int assignedLobe = -1;
};

struct TrajectoryOptions {
  double dt = 0.05;
  /// Jump times are resolved to dt / 2^refinements.
  int refinements = 12;
};

/// Quantum-jump unraveling with exact non-Hermitian propagators.
class TrajectorySimulator {
 public:
  TrajectorySimulator(const ResonatorParams& params, const fock::FockSpace& space, const TrajectoryOptions& options = {});

  int cutoff() const { return cutoff_; }
  double dt() const { return options_.dt; }

  /// Records on the grid 0, dt, ... up to tMax. When `lobes` is given, lobe
  /// fidelities are stored for grid times inside `window`, and the a-priori
  /// and assigned lobes are filled in.
  TrajectoryRecord run(const CVector& psi0, double tMax, std::mt19937_64& rng, const LobeSet* lobes = nullptr,
                       const MeasureWindow& window = {}) const;

 private:
  void advance(CVector& psi, int level, double& clock, double& threshold, std::mt19937_64& rng,
               std::vector<JumpEvent>& jumps) const;
  void jump(CVector& psi, double clock, double& threshold, std::mt19937_64& rng, std::vector<JumpEvent>& jumps) const;

  int cutoff_;
  TrajectoryOptions options_;
  std::vector<CMatrix> propagators_;
  std::vector<CMatrix> jumpOps_;
};

/// Independent stream for trajectory `index` of a run seeded with `seed`.
std::mt19937_64 trajectoryRng(std::uint64_t seed, std::uint64_t index);

TrajectoryRecord mcTrajectory(const CVector& psi0, const ResonatorParams& params, const fock::FockSpace& space,
                              double tMax, std::uint64_t seed, const TrajectoryOptions& options = {});

/// Time-averaged fidelity argmax over the record's window rows.
/// ConfigError when the record does not reach the window end.
int assignLobe(const TrajectoryRecord& record, const MeasureWindow& window);
/// Cheap cross-check: phase sector of the window-averaged <a>.
int phaseLobe(const TrajectoryRecord& record, int n);

struct SamplingOptions {
  /// Displacement modulus drawn from [ampLow, ampHigh] x |beta|.
  double ampLow = 0.5;
  double ampHigh = 1.5;
  /// Squeezing modulus drawn from [0, squeezeMax].
  double squeezeMax = 0.5;

  void validate() const;
};

struct InitialState {
  Complex beta;
  Complex xi;
};

InitialState sampleInitialState(double amplitude, const SamplingOptions& sampling, std::mt19937_64& rng);

/// Cutoff with mean + 6 sigma headroom for every state the sampler can draw.
int samplingCutoff(double amplitude, const SamplingOptions& sampling);

struct PrepareOptions {
  fock::CutoffOptions cutoff;
  WindowOptions window;
  /// Lobe assignment looks at [tStart, min(tEnd, tStart + measureSpan)].
  double measureSpan = 10.0;
  SamplingOptions sampling;
  TrajectoryOptions trajectory;
  /// Proceed with an unconverged cutoff (logged).
  bool force = false;
};

/// Everything shared read-only by the trajectories of one parameter set.
struct Prepared {
  ResonatorParams params;
  double amplitude = 0.0;
  fock::CutoffReport cutoff;
  MetastableWindow window;
  MeasureWindow measure;
  LobeSet lobes;
  int trajectoryCutoff = 0;
  SamplingOptions sampling;
  TrajectoryOptions trajectory;
};

/// Cutoff selection, spectrum, window and lobe references.
/// PhysicsError for an unconverged cutoff (unless forced) or a missing window.
Prepared prepare(const ResonatorParams& params, const PrepareOptions& options = {});

struct SuccessSpec {
  int n = 3;
  std::vector<int> ms{3, 4};
  std::vector<double> meanPhotons{8.0};
  double detuning = 0.4;
  double gammaM = 0.2;
  int trajectories = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  PrepareOptions prepare;
};

struct SuccessResult {
  ResonatorParams params;
  double meanPhoton = 0.0;
  int trajectories = 0;
  int successes = 0;
  double pHat = 0.0;
  double standardError = 0.0;
  double baseline = 0.0;
  /// Fraction of trajectories where the phase classifier agrees.
  double phaseAgreement = 0.0;
  int cutoff = 0;
  int trajectoryCutoff = 0;
  MetastableWindow window;
  /// Set when the parameter set was skipped (no window, no convergence).
  std::optional<std::string> skipped;
};

std::vector<SuccessResult> successExperiment(const SuccessSpec& spec);

/// One trajectory of the success protocol; `rotation` turns the sampled
/// initial state by rotation * 2 pi / n before it is evolved.
TrajectoryRecord successTrajectory(const Prepared& prepared, const TrajectorySimulator& simulator,
                                   std::uint64_t seed, std::uint64_t index, int rotation = 0);

struct BasinSpec {
  /// Radii in units of |beta|.
  std::vector<double> radii{0.6, 1.0, 1.4};
  int angles = 24;
  int trajectoriesPerPoint = 3;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct BasinPoint {
  Complex alpha;
  int assignedLobe = -1;
  int votes = 0;
};

/// Majority-vote lobe for coherent starts on a polar grid (radius-major,
/// angles counter-clockwise from 0).
std::vector<BasinPoint> basinMap(const Prepared& prepared, const BasinSpec& spec);

/// True when, on every ring, each lobe owns a single contiguous arc and all n
/// lobes appear.
bool basinsContiguous(const std::vector<BasinPoint>& points, int angles, int n);

}  // namespace qphot::qam
