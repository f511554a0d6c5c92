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

#include "qphot/qam.hpp"

#include "qphot/errors.hpp"
#include "qphot/log.hpp"
#include "qphot/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qphot::qam {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double traceDistance(const CMatrix& a, const CMatrix& b) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a - b, Eigen::EigenvaluesOnly);
  return 0.5 * eig.eigenvalues().cwiseAbs().sum();
}

CMatrix matrixPower(const CMatrix& a, int k) {
  CMatrix out = CMatrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

}  // namespace

double lobeAmplitude(const ResonatorParams& params) {
  params.validate();
  const int exponent = 2 * params.m - params.n;
  if (exponent == 0) throw ConfigError("lobe amplitude undefined for 2m = n");
  if (params.drive == 0.0) return 0.0;
  if (params.gammaM <= 0.0) throw ConfigError("lobe amplitude needs gamma_m > 0");
  return std::pow(2.0 * params.n * params.drive / (params.m * params.gammaM), 1.0 / exponent);
}

double driveForMeanPhoton(int n, int m, double gammaM, double meanPhoton) {
  if (2 * m == n) throw ConfigError("lobe amplitude undefined for 2m = n");
  if (!(gammaM > 0.0) || meanPhoton < 0.0) throw ConfigError("need gamma_m > 0 and a non-negative photon number");
  return m * gammaM * std::pow(std::sqrt(meanPhoton), 2 * m - n) / (2.0 * n);
}

double lobePhase(int j, int n) { return (2 * j + 1) * std::numbers::pi / n; }

MetastableWindow metastableWindow(const fock::Liouvillian& liouvillian, const WindowOptions& options) {
  const int n = liouvillian.params().n;
  return metastableWindow(fock::spectrum(liouvillian, n + 1), n, options);
}

MetastableWindow metastableWindow(const std::vector<fock::Eigenpair>& spec, int n, const WindowOptions& options) {
  if (static_cast<int>(spec.size()) < n + 1) throw ConfigError("window needs at least n + 1 eigenvalues");
  MetastableWindow w;
  for (const auto& e : spec) w.eigenvalues.push_back(e.value);
  double slow = 0.0;
  for (int j = 1; j < n; ++j) slow = std::max(slow, std::abs(spec[j].value.real()));
  const double fast = std::abs(spec[n].value.real());
  w.gapRatio = slow > 0.0 ? fast / slow : std::numeric_limits<double>::infinity();
  w.tStart = options.fastEfolds / fast;
  w.tEnd = slow > 0.0 ? options.slowDecay / slow : std::numeric_limits<double>::infinity();
  if (w.tStart >= w.tEnd) {
    throw PhysicsError(fmt::format("no metastable window: tStart {:.4g} >= tEnd {:.4g} (gap ratio {:.3g})", w.tStart,
                                   w.tEnd, w.gapRatio));
  }
  if (w.gapRatio <= options.warnGap) {
    log::warn(fmt::format("weak spectral gap: ratio {:.3g}, window [{:.4g}, {:.4g}]", w.gapRatio, w.tStart, w.tEnd));
  }
  return w;
}

LobeSet buildLobeSet(const fock::Liouvillian& liouvillian, const MetastableWindow& window, int cutoff) {
  const ResonatorParams& p = liouvillian.params();
  const fock::FockSpace space(liouvillian.cutoff());
  LobeSet set;
  set.n = p.n;
  set.amplitude = lobeAmplitude(p);
  if (set.amplitude <= 0.0) throw PhysicsError("lobes need a non-zero drive");
  const int target = cutoff == 0 ? liouvillian.cutoff() : cutoff;
  fock::Evolver evolver(liouvillian);
  for (int j = 0; j < p.n; ++j) {
    Lobe lobe;
    lobe.phase = lobePhase(j, p.n);
    const CMatrix start = fock::projector(fock::coherent(std::polar(set.amplitude, lobe.phase), space));
    const CMatrix settled = evolver.step(start, window.tStart);
    const double moved = traceDistance(settled, evolver.step(settled, window.tStart));
    if (moved > 0.05) {
      throw PhysicsError(fmt::format("lobe {} still moving at tStart (trace distance {:.3g})", j, moved));
    }
    lobe.reference = fock::pad(settled, target);
    lobe.mandelQ = fock::mandelQ(settled);
    lobe.meanA = fock::expectA(settled);
    set.lobes.push_back(std::move(lobe));
  }
  return set;
}

std::vector<double> lobeFidelities(const CVector& psi, const LobeSet& lobes) {
  if (psi.size() != lobes.cutoff()) throw ConfigError("state and lobe references have different cutoffs");
  std::vector<double> out;
  out.reserve(lobes.lobes.size());
  for (const auto& lobe : lobes.lobes) out.push_back(psi.dot(lobe.reference * psi).real());
  return out;
}

int argmaxLobe(const std::vector<double>& scores, const char* context) {
  if (scores.empty()) throw ConfigError("no lobes to choose from");
  const double top = *std::max_element(scores.begin(), scores.end());
  const double tol = 1e-12 * std::max(std::abs(top), 1e-300);
  std::vector<int> tied;
  for (int j = 0; j < static_cast<int>(scores.size()); ++j) {
    if (top - scores[j] <= tol) tied.push_back(j);
  }
  if (tied.size() > 1) {
    std::string which;
    for (int j : tied) which += (which.empty() ? "" : ", ") + std::to_string(j);
    log::info(fmt::format("{}: tie between lobes {}, taking {}", context, which, tied.front()));
  }
  return tied.front();
}

int aprioriLobe(const CVector& psi0, const LobeSet& lobes) {
  return argmaxLobe(lobeFidelities(psi0, lobes), "a-priori lobe");
}

int nearestPhaseLobe(Complex meanA, int n) {
  double angle = std::fmod(std::arg(meanA), kTwoPi);
  if (angle < 0.0) angle += kTwoPi;
  return std::min(n - 1, static_cast<int>(std::floor(angle * n / kTwoPi)));
}

TrajectorySimulator::TrajectorySimulator(const ResonatorParams& params, const fock::FockSpace& space,
                                         const TrajectoryOptions& options)
    : cutoff_(space.cutoff()), options_(options) {
  if (!(options.dt > 0.0)) throw ConfigError("trajectory dt must be > 0");
  if (options.refinements < 0 || options.refinements > 30) throw ConfigError("refinements must lie in [0, 30]");
  const fock::Ladder ops = fock::ladderOperators(space);
  const CMatrix am = matrixPower(ops.a, params.m);
  jumpOps_ = {std::sqrt(fock::kGamma1) * ops.a, std::sqrt(params.gammaM) * am};
  const CMatrix decay = fock::kGamma1 * ops.number + params.gammaM * CMatrix(am.adjoint() * am);
  const CMatrix heff = fock::hamiltonian(params, space) - Complex(0.0, 0.5) * decay;
  double h = options.dt;
  for (int k = 0; k <= options.refinements; ++k, h /= 2) {
    propagators_.push_back(CMatrix(Complex(0.0, -h) * heff).exp());
  }
}

void TrajectorySimulator::jump(CVector& psi, double clock, double& threshold, std::mt19937_64& rng,
                               std::vector<JumpEvent>& jumps) const {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> weights;
  for (const auto& op : jumpOps_) weights.push_back((op * psi).squaredNorm());
  const double total = weights[0] + weights[1];
  if (total > 0.0) {
    const int channel = uni(rng) * total < weights[0] ? 0 : 1;
    psi = jumpOps_[channel] * psi;
    jumps.push_back({clock, channel});
  }
  psi.normalize();
  threshold = 1.0 - uni(rng);
}

void TrajectorySimulator::advance(CVector& psi, int level, double& clock, double& threshold, std::mt19937_64& rng,
                                  std::vector<JumpEvent>& jumps) const {
  CVector trial = propagators_[level] * psi;
  const double norm = trial.squaredNorm();
  if (!std::isfinite(norm) || norm < 1e-290) throw NumericalError("trajectory norm underflow");
  const double h = options_.dt / std::ldexp(1.0, level);
  if (norm > threshold) {
    psi = std::move(trial);
    clock += h;
    return;
  }
  if (level == options_.refinements) {
    psi = std::move(trial);
    clock += h;
    jump(psi, clock, threshold, rng, jumps);
    return;
  }
  // The jump lies inside this interval: split it.
  advance(psi, level + 1, clock, threshold, rng, jumps);
  advance(psi, level + 1, clock, threshold, rng, jumps);
}

TrajectoryRecord TrajectorySimulator::run(const CVector& psi0, double tMax, std::mt19937_64& rng,
                                          const LobeSet* lobes, const MeasureWindow& window) const {
  if (psi0.size() != cutoff_) throw ConfigError("initial state does not match the simulator cutoff");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ConfigError("initial state is not normalized");
  if (!(tMax >= 0.0)) throw ConfigError("tMax must be >= 0");
  const auto steps = static_cast<int>(std::ceil(tMax / options_.dt - 1e-9));

  TrajectoryRecord rec;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  CVector psi = psi0;
  double threshold = 1.0 - uni(rng);
  double clock = 0.0;

  auto record = [&](double t) {
    const CVector phi = psi.normalized();
    rec.times.push_back(t);
    rec.meanA.push_back(fock::expectA(phi));
    const double n = fock::meanPhoton(phi);
    rec.meanN.push_back(n);
    rec.mandelQ.push_back(n > 1e-12 ? fock::mandelQ(phi) : std::numeric_limits<double>::quiet_NaN());
    if (lobes && t >= window.begin - 1e-12 && t <= window.end + 1e-12) {
      rec.windowRows.push_back(rec.times.size() - 1);
      rec.fidelities.push_back(lobeFidelities(phi, *lobes));
    }
  };

  record(0.0);
  for (int s = 1; s <= steps; ++s) {
    advance(psi, 0, clock, threshold, rng, rec.jumps);
    clock = s * options_.dt;
    record(clock);
  }
  if (lobes) {
    rec.aprioriLobe = aprioriLobe(psi0, *lobes);
    if (!rec.windowRows.empty()) rec.assignedLobe = assignLobe(rec, window);
  }
  return rec;
}

std::mt19937_64 trajectoryRng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

TrajectoryRecord mcTrajectory(const CVector& psi0, const ResonatorParams& params, const fock::FockSpace& space,
                              double tMax, std::uint64_t seed, const TrajectoryOptions& options) {
  auto rng = trajectoryRng(seed, 0);
  return TrajectorySimulator(params, space, options).run(psi0, tMax, rng);
}

int assignLobe(const TrajectoryRecord& record, const MeasureWindow& window) {
  if (record.times.empty() || record.times.back() < window.end - 1e-9) {
    throw ConfigError("trajectory does not cover the measure window");
  }
  if (record.fidelities.empty()) throw ConfigError("trajectory has no lobe fidelities inside the window");
  std::vector<double> mean(record.fidelities.front().size(), 0.0);
  for (const auto& row : record.fidelities) {
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += row[j];
  }
  for (auto& v : mean) v /= static_cast<double>(record.fidelities.size());
  return argmaxLobe(mean, "lobe assignment");
}

int phaseLobe(const TrajectoryRecord& record, int n) {
  if (record.windowRows.empty()) throw ConfigError("trajectory has no window rows");
  Complex sum = 0.0;
  for (auto row : record.windowRows) sum += record.meanA[row];
  return nearestPhaseLobe(sum, n);
}

void SamplingOptions::validate() const {
  if (!(ampLow >= 0.0 && ampHigh >= ampLow)) throw ConfigError("sampling amplitude range is invalid");
  if (!(squeezeMax >= 0.0)) throw ConfigError("sampling squeezing bound must be >= 0");
}

InitialState sampleInitialState(double amplitude, const SamplingOptions& sampling, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double mod = amplitude * (sampling.ampLow + (sampling.ampHigh - sampling.ampLow) * uni(rng));
  const double phase = kTwoPi * uni(rng);
  const double r = sampling.squeezeMax * uni(rng);
  const double sqPhase = kTwoPi * uni(rng);
  return {std::polar(mod, phase), std::polar(r, sqPhase)};
}

int samplingCutoff(double amplitude, const SamplingOptions& sampling) {
  sampling.validate();
  const double b = amplitude * sampling.ampHigh;
  const double r = sampling.squeezeMax;
  const double sh = std::sinh(r);
  const double ch = std::cosh(r);
  const double mean = b * b + sh * sh;
  const double var = b * b * std::exp(2 * r) + 2 * sh * sh * ch * ch;
  // One sigma beyond the hard limit keeps truncation losses negligible.
  return static_cast<int>(std::ceil(mean + 6.0 * std::sqrt(var))) + 2;
}

Prepared prepare(const ResonatorParams& params, const PrepareOptions& options) {
  params.validate();
  options.sampling.validate();
  if (!(options.measureSpan > 0.0)) throw ConfigError("measure span must be > 0");
  Prepared out;
  out.params = params;
  out.amplitude = lobeAmplitude(params);
  out.cutoff = fock::selectCutoff(params, out.amplitude * out.amplitude, options.cutoff);
  if (!out.cutoff.converged) {
    const auto msg = fmt::format("cutoff not converged at D = {} (drift {:.3g})", out.cutoff.cutoff, out.cutoff.drift);
    if (!options.force) throw PhysicsError(msg);
    log::warn(msg + ", continuing as forced");
  }
  const fock::Liouvillian liouvillian(params, fock::FockSpace(out.cutoff.cutoff));
  out.window = metastableWindow(liouvillian, options.window);
  out.measure = {out.window.tStart, std::min(out.window.tEnd, out.window.tStart + options.measureSpan)};
  out.trajectoryCutoff = std::max(out.cutoff.cutoff, samplingCutoff(out.amplitude, options.sampling));
  out.lobes = buildLobeSet(liouvillian, out.window, out.trajectoryCutoff);
  out.sampling = options.sampling;
  out.trajectory = options.trajectory;
  log::info(fmt::format("(n, m) = ({}, {}), eta = {:.4g}: D = {}, trajectory D = {}, window [{:.4g}, {:.4g}], gap {:.3g}",
                        params.n, params.m, params.drive, out.cutoff.cutoff, out.trajectoryCutoff, out.window.tStart,
                        out.window.tEnd, out.window.gapRatio));
  return out;
}

TrajectoryRecord successTrajectory(const Prepared& prepared, const TrajectorySimulator& simulator, std::uint64_t seed,
                                   std::uint64_t index, int rotation) {
  auto rng = trajectoryRng(seed, index);
  const InitialState init = sampleInitialState(prepared.amplitude, prepared.sampling, rng);
  return simulator.run(fock::rotate(fock::squeezedCoherent(init.beta, init.xi, fock::FockSpace(simulator.cutoff())),
                                    rotation * kTwoPi / prepared.params.n),
                       prepared.measure.end, rng, &prepared.lobes, prepared.measure);
}

std::vector<SuccessResult> successExperiment(const SuccessSpec& spec) {
  if (spec.trajectories < 1) throw ConfigError("need at least one trajectory");
  std::vector<SuccessResult> out;
  for (double target : spec.meanPhotons) {
    for (int m : spec.ms) {
      SuccessResult res;
      res.params = {spec.n, m, spec.detuning, driveForMeanPhoton(spec.n, m, spec.gammaM, target), spec.gammaM};
      res.meanPhoton = target;
      res.baseline = 1.0 / spec.n;
      Prepared prep;
      try {
        prep = prepare(res.params, spec.prepare);
      } catch (const PhysicsError& e) {
        log::warn(fmt::format("skipping (n, m) = ({}, {}), <n> = {}: {}", spec.n, m, target, e.what()));
        res.skipped = e.what();
        out.push_back(std::move(res));
        continue;
      }
      const TrajectorySimulator sim(res.params, fock::FockSpace(prep.trajectoryCutoff), prep.trajectory);
      std::vector<int> success(spec.trajectories), agree(spec.trajectories);
      parallelFor(static_cast<std::size_t>(spec.trajectories), spec.threads, [&](std::size_t i) {
        const TrajectoryRecord rec = successTrajectory(prep, sim, spec.seed, i);
        success[i] = rec.assignedLobe == rec.aprioriLobe;
        agree[i] = phaseLobe(rec, spec.n) == rec.assignedLobe;
      });
      res.trajectories = spec.trajectories;
      for (int i = 0; i < spec.trajectories; ++i) {
        res.successes += success[i];
        res.phaseAgreement += agree[i];
      }
      res.phaseAgreement /= spec.trajectories;
      res.pHat = static_cast<double>(res.successes) / spec.trajectories;
      res.standardError = std::sqrt(res.pHat * (1.0 - res.pHat) / spec.trajectories);
      res.cutoff = prep.cutoff.cutoff;
      res.trajectoryCutoff = prep.trajectoryCutoff;
      res.window = prep.window;
      out.push_back(std::move(res));
    }
  }
  return out;
}

std::vector<BasinPoint> basinMap(const Prepared& prepared, const BasinSpec& spec) {
  if (spec.angles < 1 || spec.trajectoriesPerPoint < 1 || spec.radii.empty()) {
    throw ConfigError("basin grid needs radii, angles and trajectories per point");
  }
  const int n = prepared.params.n;
  const fock::FockSpace space(prepared.trajectoryCutoff);
  const TrajectorySimulator sim(prepared.params, space, prepared.trajectory);
  std::vector<BasinPoint> points;
  for (double r : spec.radii) {
    for (int k = 0; k < spec.angles; ++k) points.push_back({std::polar(r * prepared.amplitude, kTwoPi * k / spec.angles)});
  }
  const auto per = static_cast<std::size_t>(spec.trajectoriesPerPoint);
  std::vector<int> lobes(points.size() * per);
  parallelFor(lobes.size(), spec.threads, [&](std::size_t task) {
    auto rng = trajectoryRng(spec.seed, task);
    const CVector psi = fock::coherent(points[task / per].alpha, space);
    lobes[task] = sim.run(psi, prepared.measure.end, rng, &prepared.lobes, prepared.measure).assignedLobe;
  });
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<double> votes(n, 0.0);
    for (std::size_t t = 0; t < per; ++t) {
      const int l = lobes[p * per + t];
      if (l >= 0) votes[l] += 1.0;
    }
    points[p].assignedLobe = argmaxLobe(votes, "basin vote");
    points[p].votes = static_cast<int>(votes[points[p].assignedLobe]);
  }
  return points;
}

bool basinsContiguous(const std::vector<BasinPoint>& points, int angles, int n) {
  if (angles < 1 || points.size() % angles != 0) throw ConfigError("basin points do not form full rings");
  for (std::size_t ring = 0; ring < points.size() / angles; ++ring) {
    std::vector<int> seq;
    for (int k = 0; k < angles; ++k) seq.push_back(points[ring * angles + k].assignedLobe);
    std::vector<int> distinct = seq;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (static_cast<int>(distinct.size()) != n || distinct.front() < 0) return false;
    int changes = 0;
    for (int k = 0; k < angles; ++k) changes += seq[k] != seq[(k + angles - 1) % angles];
    if (changes != n) return false;
  }
  return true;
}

}  // namespace qphot::qam
