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


#include "doctest.h"

#include "qphot/errors.hpp"
#include "qphot/log.hpp"
#include "qphot/qam.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <string>

using namespace qphot;
using namespace qphot::qam;

namespace {

constexpr double kPi = std::numbers::pi;

// Small but genuinely metastable (3, 3) set used by the trajectory tests.
const Prepared& smallPrepared() {
  static const Prepared prep = [] {
    PrepareOptions opts;
    opts.cutoff.minCutoff = 16;
    ResonatorParams p{3, 3, 0.4, driveForMeanPhoton(3, 3, 0.2, 4.0), 0.2};
    return prepare(p, opts);
  }();
  return prep;
}

CMatrix sqrtPsd(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(m);
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.eigenvectors().adjoint();
}

double uhlmann(const CMatrix& a, const CMatrix& b) {
  const CMatrix s = sqrtPsd(a);
  const double t = sqrtPsd(s * b * s).trace().real();
  return t * t;
}

}  // namespace

TEST_SUITE("qam") {
  TEST_CASE("lobe amplitude") {
    CHECK(lobeAmplitude({4, 4, 0.4, 3.9, 0.2}) == doctest::Approx(std::pow(39.0, 0.25)));
    CHECK(lobeAmplitude({4, 4, 0.4, 3.9, 0.2}) == doctest::Approx(2.499).epsilon(1e-3));
    CHECK(lobeAmplitude({3, 4, 0.4, 13.02, 0.2}) == doctest::Approx(2.499).epsilon(1e-3));
    CHECK(lobeAmplitude({3, 4, 0.4, 0.0, 0.2}) == 0.0);
    CHECK(lobeAmplitude({3, 4, 0.4, 1e-12, 0.2}) < 1e-2);
    CHECK_THROWS_AS(lobeAmplitude({4, 2, 0.4, 1.0, 0.2}), ConfigError);
    for (int m : {3, 4, 5}) {
      const double eta = driveForMeanPhoton(3, m, 0.2, 8.0);
      CHECK(std::pow(lobeAmplitude({3, m, 0.4, eta, 0.2}), 2) == doctest::Approx(8.0));
    }
    CHECK(driveForMeanPhoton(3, 3, 0.2, 8.0) == doctest::Approx(0.1 * std::pow(8.0, 1.5)));
    CHECK(lobePhase(0, 3) == doctest::Approx(kPi / 3));
    CHECK(lobePhase(2, 4) == doctest::Approx(5 * kPi / 4));
  }

  TEST_CASE("steady photon number follows the lobe amplitude") {
    for (ResonatorParams p : {ResonatorParams{4, 4, 0.4, 3.9, 0.2}, ResonatorParams{3, 4, 0.4, 13.02, 0.2}}) {
      const double b2 = std::pow(lobeAmplitude(p), 2);
      const auto rho = fock::steadyState(fock::Liouvillian(p, fock::FockSpace(32)));
      CHECK(std::abs(fock::meanPhoton(rho) / b2 - 1.0) < 0.15);
    }
  }

  TEST_CASE("metastable window") {
    const fock::Liouvillian free({3, 4, 0.4, 0.0, 0.2}, fock::FockSpace(12));
    CHECK_THROWS_AS(metastableWindow(free), PhysicsError);

    const Prepared& prep = smallPrepared();
    const MetastableWindow& w = prep.window;
    CHECK(w.tStart < w.tEnd);
    CHECK(w.gapRatio > 25.0);
    CHECK(std::abs(w.eigenvalues[0]) < 1e-8);
    CHECK(w.tStart * std::abs(w.eigenvalues[3].real()) == doctest::Approx(5.0));
    CHECK(prep.measure.end == doctest::Approx(std::min(w.tEnd, w.tStart + 10.0)));

    // Rescaling gamma_m moves the endpoints inversely to the eigenvalues.
    ResonatorParams p = prep.params;
    p.gammaM *= 0.5;
    const MetastableWindow w2 = metastableWindow(fock::Liouvillian(p, fock::FockSpace(prep.cutoff.cutoff)));
    CHECK(w2.tStart / w.tStart ==
          doctest::Approx(std::abs(w.eigenvalues[3].real() / w2.eigenvalues[3].real())).epsilon(1e-9));
    const double slow1 = std::max(std::abs(w.eigenvalues[1].real()), std::abs(w.eigenvalues[2].real()));
    const double slow2 = std::max(std::abs(w2.eigenvalues[1].real()), std::abs(w2.eigenvalues[2].real()));
    CHECK(w2.tEnd / w.tEnd == doctest::Approx(slow1 / slow2).epsilon(1e-9));
  }

  TEST_CASE("lobe references") {
    const Prepared& prep = smallPrepared();
    const LobeSet& lobes = prep.lobes;
    REQUIRE(lobes.lobes.size() == 3);
    CHECK(lobes.cutoff() == prep.trajectoryCutoff);
    for (int j = 0; j < 3; ++j) {
      const int next = (j + 1) % 3;
      const CMatrix turned = fock::rotate(lobes.lobes[j].reference, 2 * kPi / 3);
      CHECK(1.0 - uhlmann(turned, lobes.lobes[next].reference) < 1e-4);
      CHECK(nearestPhaseLobe(lobes.lobes[j].meanA, 3) == j);
    }
    for (int j = 0; j < 3; ++j) {
      const CVector own = Eigen::SelfAdjointEigenSolver<CMatrix>(lobes.lobes[j].reference).eigenvectors().col(
          prep.trajectoryCutoff - 1);
      CHECK(aprioriLobe(own, lobes) == j);
    }
  }

  TEST_CASE("coherent-like lobes for n = m") {
    const fock::Liouvillian l({4, 4, 0.4, 3.9, 0.2}, fock::FockSpace(32));
    const LobeSet lobes = buildLobeSet(l, metastableWindow(l));
    REQUIRE(lobes.lobes.size() == 4);
    for (const auto& lobe : lobes.lobes) CHECK(std::abs(lobe.mandelQ) < 0.1);
  }

  TEST_CASE("amplitude-squeezed lobes for m > n") {
    const fock::Liouvillian l({3, 4, 0.4, 13.02, 0.2}, fock::FockSpace(32));
    const MetastableWindow w = metastableWindow(l);
    CHECK(w.gapRatio > 10.0);
    const LobeSet lobes = buildLobeSet(l, w);
    for (const auto& lobe : lobes.lobes) CHECK(lobe.mandelQ < 0.0);
  }

  TEST_CASE("classifiers and ties") {
    CHECK(nearestPhaseLobe(std::polar(1.0, 0.1), 3) == 0);
    CHECK(nearestPhaseLobe(std::polar(1.0, kPi), 3) == 1);
    CHECK(nearestPhaseLobe(std::polar(1.0, -0.1), 3) == 2);

    std::string logged;
    log::setSink([&](log::Level, std::string_view m) { logged += std::string(m); });
    log::setLevel(log::Level::Info);
    CHECK(argmaxLobe({0.3, 0.3, 0.1}, "test") == 0);
    CHECK(logged.find("tie") != std::string::npos);
    logged.clear();

    // Without detuning the lobes at +-pi/3 mirror each other, so a real
    // coherent state sits exactly between lobes 0 and 2.
    PrepareOptions opts;
    opts.cutoff.minCutoff = 16;
    const Prepared mirror = prepare({3, 3, 0.0, driveForMeanPhoton(3, 3, 0.2, 4.0), 0.2}, opts);
    const CVector mid = fock::coherent(2.0, fock::FockSpace(mirror.trajectoryCutoff));
    const auto f = lobeFidelities(mid, mirror.lobes);
    CHECK(std::abs(f[0] - f[2]) < 1e-12);
    CHECK(aprioriLobe(mid, mirror.lobes) == 0);
    CHECK(logged.find("tie") != std::string::npos);
    log::setSink({});
    log::setLevel(log::Level::Warn);
  }

  TEST_CASE("single-photon decay jump statistics") {
    const ResonatorParams p{2, 2, 0.3, 0.0, 0.0};
    const fock::FockSpace space(4);
    const TrajectorySimulator sim(p, space);
    const CVector one = fock::fockState(1, space);
    double sum = 0.0;
    const int samples = 10000;
    for (int i = 0; i < samples; ++i) {
      auto rng = trajectoryRng(21, i);
      const auto rec = sim.run(one, 25.0, rng);
      REQUIRE(rec.jumps.size() == 1);
      CHECK(rec.jumps[0].channel == 0);
      sum += rec.jumps[0].time;
    }
    CHECK(std::abs(sum / samples - 1.0) < 0.03);
  }

  TEST_CASE("trajectory average matches the master equation") {
    const ResonatorParams p{3, 4, 0.4, 2.0, 0.2};
    const fock::FockSpace space(24);
    const CVector psi0 = fock::coherent(Complex(1.2, 0.9), space);
    const TrajectorySimulator sim(p, space, {0.1, 10});
    const int count = 500;
    std::vector<double> avg;
    std::vector<double> times;
    for (int i = 0; i < count; ++i) {
      auto rng = trajectoryRng(5, i);
      const auto rec = sim.run(psi0, 2.0, rng);
      if (avg.empty()) {
        avg.assign(rec.times.size(), 0.0);
        times = rec.times;
      }
      for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += rec.meanN[k] / count;
    }
    const auto exact = fock::evolve(fock::projector(psi0), fock::Liouvillian(p, space), times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      CHECK(std::abs(avg[k] / fock::meanPhoton(exact[k]) - 1.0) < 0.05);
    }
  }

  TEST_CASE("trajectories are reproducible") {
    const ResonatorParams p{3, 4, 0.4, 2.0, 0.2};
    const fock::FockSpace space(20);
    const CVector psi0 = fock::coherent(1.0, space);
    const auto a = mcTrajectory(psi0, p, space, 1.0, 3);
    const auto b = mcTrajectory(psi0, p, space, 1.0, 3);
    CHECK(a.meanN == b.meanN);
    CHECK(a.jumps.size() == b.jumps.size());
    CHECK(a.times.size() == 21);
    for (std::size_t k = 0; k < a.times.size(); ++k) CHECK(std::abs(a.meanA[k]) >= 0.0);
    CHECK_THROWS_AS(mcTrajectory(2.0 * psi0, p, space, 1.0, 3), ConfigError);
  }

  TEST_CASE("retrieval protocol") {
    const Prepared& prep = smallPrepared();
    const TrajectorySimulator sim(prep.params, fock::FockSpace(prep.trajectoryCutoff), prep.trajectory);
    int agree = 0;
    for (int i = 0; i < 12; ++i) {
      const auto rec = successTrajectory(prep, sim, 4, i);
      const auto turned = successTrajectory(prep, sim, 4, i, 1);
      CHECK(turned.aprioriLobe == (rec.aprioriLobe + 1) % 3);
      CHECK(turned.assignedLobe == (rec.assignedLobe + 1) % 3);
      agree += phaseLobe(rec, 3) == rec.assignedLobe;
      CHECK(std::isfinite(rec.meanN.back()));
    }
    CHECK(agree >= 11);

    TrajectoryRecord shortRec;
    shortRec.times = {0.0, 0.1};
    CHECK_THROWS_AS(assignLobe(shortRec, prep.measure), ConfigError);
  }

  TEST_CASE("sampling headroom") {
    std::mt19937_64 rng(1);
    const SamplingOptions s;
    const int d = samplingCutoff(2.0, s);
    for (int i = 0; i < 200; ++i) {
      const InitialState st = sampleInitialState(2.0, s, rng);
      CHECK(std::abs(st.beta) >= 1.0 - 1e-12);
      CHECK(std::abs(st.beta) <= 3.0 + 1e-12);
      CHECK(std::abs(st.xi) <= 0.5);
      CHECK_NOTHROW(fock::squeezedCoherent(st.beta, st.xi, fock::FockSpace(d)));
    }
  }

  TEST_CASE("basin contiguity") {
    auto ring = [](std::vector<int> lobes) {
      std::vector<BasinPoint> pts;
      for (int l : lobes) pts.push_back({0.0, l, 1});
      return pts;
    };
    CHECK(basinsContiguous(ring({0, 0, 1, 1, 2, 2}), 6, 3));
    CHECK(basinsContiguous(ring({2, 0, 0, 1, 1, 2}), 6, 3));
    CHECK_FALSE(basinsContiguous(ring({0, 1, 0, 1, 2, 2}), 6, 3));
    CHECK_FALSE(basinsContiguous(ring({0, 0, 1, 1, 1, 1}), 6, 3));
    CHECK_FALSE(basinsContiguous(ring({0, 0, 1, 1, -1, 2}), 6, 3));
  }
}
