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

#include "oracles.hpp"
#include "qphot/errors.hpp"
#include "qphot/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace qphot::gaussian;
using qphot::ConfigError;

namespace {

double maxAbs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Symplectic randomSymplectic(int modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  return crystalSymplectic(modes, 1.2 * uni(rng), rng());
}

}  // namespace

TEST_SUITE("gaussian") {

TEST_CASE("vacuum covariance and purity") {
  const auto v1 = vacuum(1);
  CHECK(maxAbs(v1.cov() - 0.5 * Matrix::Identity(2, 2)) == 0.0);
  const auto v2 = vacuum(2);
  CHECK(maxAbs(v2.cov() - 0.5 * Matrix::Identity(4, 4)) == 0.0);
  CHECK(vacuum(12).purity() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v2.mean().isZero());
  CHECK_THROWS_AS(vacuum(0), ConfigError);
}

TEST_CASE("state validation rejects asymmetric and unphysical covariances") {
  Matrix asym = 0.5 * Matrix::Identity(2, 2);
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(GaussianState{asym}, ConfigError);
  CHECK_THROWS_AS(GaussianState{Matrix(0.1 * Matrix::Identity(2, 2))}, ConfigError);
  CHECK_THROWS_AS(GaussianState{Matrix::Identity(3, 3)}, ConfigError);
  CHECK_NOTHROW(GaussianState{Matrix(0.7 * Matrix::Identity(4, 4))});
}

TEST_CASE("decibel anchors") {
  CHECK(squeezingDecibels(0.75) == doctest::Approx(-3.2572).epsilon(1e-4));
  CHECK(squeezingDecibels(1.5) == doctest::Approx(-6.5144).epsilon(1e-4));
  CHECK(SqueezingSpec{0.0, 1.0}.decibels() == 0.0);
  CHECK(strengthFromDecibels(squeezingDecibels(0.42)) == doctest::Approx(0.42));
}

TEST_CASE("squeezed input state") {
  SUBCASE("zero strength is vacuum for any phase") {
    for (double phi : {0.0, 0.3, 2.0, -1.0}) {
      CHECK(maxAbs(squeezedInputState(3, {0.0, phi}).cov() - vacuum(3).cov()) < 1e-15);
    }
  }
  SUBCASE("phase zero squeezes p") {
    const auto s = squeezedInputState(1, {0.75, 0.0});
    CHECK(s.cov()(0, 0) == doctest::Approx(0.5 * std::exp(0.75)));
    CHECK(s.cov()(1, 1) == doctest::Approx(0.5 * std::exp(-0.75)));
    CHECK(s.cov()(1, 1) == doctest::Approx(0.2362).epsilon(1e-4));
    CHECK(s.cov()(0, 1) == 0.0);
  }
  SUBCASE("phase pi/2 gives off-diagonal sinh") {
    const auto s = squeezedInputState(1, {0.75, std::numbers::pi / 2});
    CHECK(s.cov()(0, 1) == doctest::Approx(0.5 * std::sinh(0.75)));
    CHECK(s.cov()(0, 1) == doctest::Approx(0.41116).epsilon(1e-4));
    CHECK(s.cov()(0, 0) == doctest::Approx(0.5 * std::cosh(0.75)));
    CHECK(s.cov()(1, 1) == doctest::Approx(0.5 * std::cosh(0.75)));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s.cov());
    CHECK(eig.eigenvalues()(0) == doctest::Approx(0.5 * std::exp(-0.75)));
    CHECK(eig.eigenvalues()(1) == doctest::Approx(0.5 * std::exp(0.75)));
  }
  SUBCASE("minimum variance is e^-xi / 2 for every phase") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
      const double xi = 2.0 * uni(rng);
      const double phi = 2.0 * std::numbers::pi * uni(rng);
      const auto s = squeezedInputState(2, {xi, phi});
      Eigen::SelfAdjointEigenSolver<Matrix> eig(s.cov());
      CHECK(eig.eigenvalues()(0) == doctest::Approx(0.5 * std::exp(-xi)).epsilon(1e-12));
      CHECK(s.purity() == doctest::Approx(1.0).epsilon(1e-10));
      CHECK((eig.eigenvalues()(0) < kVacuumVariance) == (xi > 0.0));
    }
  }
  CHECK_THROWS_AS(squeezedInputState(1, {-0.1, 0.0}), ConfigError);
}

TEST_CASE("50:50 beam splitter") {
  const auto bs = beamSplitter5050(3);
  CHECK(bs.symplecticDefect() < 1e-15);
  CHECK(maxAbs(bs.matrix() * bs.matrix().transpose() - Matrix::Identity(12, 12)) < 1e-15);
  CHECK(maxAbs(applySymplectic(vacuum(6), bs).cov() - vacuum(6).cov()) < 1e-15);

  // loop squeezed (xi = 0.75, phi = 0) mixed with a vacuum input.
  const auto in = tensorProduct(squeezedInputState(1, {0.75, 0.0}), vacuum(1));
  const auto out = applySymplectic(in, beamSplitter5050(1));
  const double big = 0.5 * std::exp(0.75);
  CHECK(out.cov()(0, 0) == doctest::Approx((big + 0.5) / 2));
  CHECK(out.cov()(2, 2) == doctest::Approx((big + 0.5) / 2));
  CHECK(out.cov()(0, 2) == doctest::Approx((big - 0.5) / 2));
  // Explicit S cov S^T.
  CHECK(maxAbs(out.cov() - beamSplitter5050(1).matrix() * in.cov() * beamSplitter5050(1).matrix().transpose()) <
        1e-15);

  const std::vector<int> keep{1};
  const auto arm = partialTrace(out, keep);
  CHECK(arm.cov()(0, 0) == doctest::Approx(0.5 * (big + 0.5)));
  CHECK(arm.cov()(1, 1) == doctest::Approx(0.5 * (0.5 * std::exp(-0.75) + 0.5)));
  CHECK(arm.purity() < 1.0);
}

TEST_CASE("crystal symplectic") {
  SUBCASE("passive when unsqueezed") {
    const auto s = crystalSymplectic(4, 0.0, 11);
    CHECK(s.symplecticDefect() < 1e-12);
    CHECK(maxAbs(s.matrix() * s.matrix().transpose() - Matrix::Identity(8, 8)) < 1e-12);
    CHECK(maxAbs(applySymplectic(vacuum(4), s).cov() - vacuum(4).cov()) < 1e-12);
  }
  SUBCASE("deterministic from seed and draw") {
    CHECK(maxAbs(crystalSymplectic(3, 0.5, 5).matrix() - crystalSymplectic(3, 0.5, 5).matrix()) == 0.0);
    CHECK(maxAbs(crystalSymplectic(3, 0.5, 5).matrix() - crystalSymplectic(3, 0.5, 6).matrix()) > 1e-3);
    CHECK(maxAbs(crystalSymplectic(3, 0.5, 5, 0).matrix() - crystalSymplectic(3, 0.5, 5, 1).matrix()) > 1e-3);
  }
  SUBCASE("Bloch-Messiah round trip recovers equal squeezing") {
    for (int modes : {1, 3, 6, 12}) {
      const auto s = crystalSymplectic(modes, 1.5, 100 + modes);
      CHECK(s.symplecticDefect() < 1e-10);
      const auto bm = blochMessiah(s);
      for (Eigen::Index i = 0; i < bm.squeezing.size(); ++i) {
        CHECK(std::abs(bm.squeezing(i) - std::exp(0.75)) < 1e-8);
      }
      CHECK(maxAbs(bm.left * symplecticForm(modes) * bm.left.transpose() - symplecticForm(modes)) < 1e-10);
      CHECK(maxAbs(bm.left * bm.left.transpose() - Matrix::Identity(2 * modes, 2 * modes)) < 1e-10);
      CHECK(maxAbs(bm.right * symplecticForm(modes) * bm.right.transpose() - symplecticForm(modes)) < 1e-10);
      Vector d(2 * modes);
      for (int i = 0; i < modes; ++i) {
        d(2 * i) = bm.squeezing(i);
        d(2 * i + 1) = 1.0 / bm.squeezing(i);
      }
      CHECK(maxAbs(bm.left * d.asDiagonal() * bm.right - s.matrix()) < 1e-10);

      // Independent oracle: ordinary singular values come in pairs e^{+-xi/2}.
      Eigen::JacobiSVD<Matrix> svd(s.matrix());
      for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        const double sv = svd.singularValues()(i);
        CHECK(std::min(std::abs(sv - std::exp(0.75)), std::abs(sv - std::exp(-0.75))) < 1e-8);
      }
    }
  }
  SUBCASE("Bloch-Messiah of passive and mixed-squeezing symplectics") {
    const auto bm0 = blochMessiah(crystalSymplectic(3, 0.0, 3));
    CHECK(maxAbs(bm0.squeezing - Vector::Ones(3)) < 1e-8);
    // Squeeze only mode 0 between two passive layers.
    Matrix d = Matrix::Identity(6, 6);
    d(0, 0) = std::exp(0.4);
    d(1, 1) = std::exp(-0.4);
    const Symplectic s(crystalSymplectic(3, 0.0, 8).matrix() * d * crystalSymplectic(3, 0.0, 9).matrix());
    const auto bm = blochMessiah(s);
    CHECK(bm.squeezing(0) == doctest::Approx(std::exp(0.4)));
    CHECK(bm.squeezing(1) == doctest::Approx(1.0));
    CHECK(bm.squeezing(2) == doctest::Approx(1.0));
    Vector dd(6);
    for (int i = 0; i < 3; ++i) {
      dd(2 * i) = bm.squeezing(i);
      dd(2 * i + 1) = 1.0 / bm.squeezing(i);
    }
    CHECK(maxAbs(bm.left * dd.asDiagonal() * bm.right - s.matrix()) < 1e-10);
    CHECK(maxAbs(bm.right * bm.right.transpose() - Matrix::Identity(6, 6)) < 1e-10);
  }
  CHECK(squeezingDecibels(1.5) == doctest::Approx(-6.51).epsilon(1e-3));
}

TEST_CASE("apply symplectic") {
  std::mt19937_64 rng(3);
  const GaussianState st(qphot::testing::randomCovariance(3, rng));
  const Symplectic id(Matrix::Identity(6, 6));
  CHECK(maxAbs(applySymplectic(st, id).cov() - st.cov()) == 0.0);
  const auto s = randomSymplectic(3, rng);
  const auto there = applySymplectic(st, s);
  const auto back = applySymplectic(there, s.inverse());
  CHECK(maxAbs(back.cov() - st.cov()) < 1e-10);
  CHECK(std::abs(there.purity() - st.purity()) < 1e-10);
  CHECK_THROWS_AS(applySymplectic(vacuum(2), s), ConfigError);
}

TEST_CASE("partial trace") {
  std::mt19937_64 rng(4);
  const GaussianState a(qphot::testing::randomCovariance(2, rng));
  const GaussianState b(qphot::testing::randomCovariance(1, rng));
  const auto ab = tensorProduct(a, b);
  const std::vector<int> all{0, 1, 2};
  CHECK(maxAbs(partialTrace(ab, all).cov() - ab.cov()) == 0.0);
  const std::vector<int> first{0, 1};
  CHECK(maxAbs(partialTrace(ab, first).cov() - a.cov()) == 0.0);
  const std::vector<int> last{2};
  CHECK(maxAbs(partialTrace(ab, last).cov() - b.cov()) == 0.0);
  const std::vector<int> none;
  CHECK_THROWS_AS(partialTrace(ab, none), ConfigError);
  const std::vector<int> bad{3};
  CHECK_THROWS_AS(partialTrace(ab, bad), ConfigError);
  const std::vector<int> dup{1, 1};
  CHECK_THROWS_AS(partialTrace(ab, dup), ConfigError);
}

TEST_CASE("homodyne moments") {
  SUBCASE("layout and length") {
    CHECK(observableCount(1) == 2);
    CHECK(observableCount(2) == 8);
    CHECK(observableCount(12) == 12 * 13 + 12 * 11);
    CHECK(homodyneMoments(vacuum(5)).size() == observableCount(5));
  }
  SUBCASE("vacuum, two modes") {
    const Vector m = homodyneMoments(vacuum(2));
    // <x1x1>, <x1x2>, <x2x2>, <x1^2x1^2>, <x1^2x2^2>, <x2^2x2^2>, <x1^3x2>, <x2^3x1>
    CHECK(m(0) == 0.5);
    CHECK(m(1) == 0.0);
    CHECK(m(2) == 0.5);
    CHECK(m(3) == doctest::Approx(0.75));
    CHECK(m(4) == doctest::Approx(0.25));
    CHECK(m(5) == doctest::Approx(0.75));
    CHECK(m(6) == 0.0);
    CHECK(m(7) == 0.0);
  }
  SUBCASE("single squeezed mode") {
    const Vector m = homodyneMoments(squeezedInputState(1, {0.75, 0.0}));
    CHECK(m(0) == doctest::Approx(1.0585).epsilon(1e-4));
    CHECK(m(1) == doctest::Approx(3.3613).epsilon(1e-4));
  }
  SUBCASE("agrees with Gauss-Hermite integration") {
    std::mt19937_64 rng(99);
    for (int modes : {2, 3}) {
      for (int trial = 0; trial < 5; ++trial) {
        const GaussianState st(qphot::testing::randomCovariance(modes, rng));
        Matrix sx(modes, modes);
        for (int i = 0; i < modes; ++i)
          for (int j = 0; j < modes; ++j) sx(i, j) = st.cov()(2 * i, 2 * j);
        const Vector m = homodyneMoments(st);
        Eigen::Index k = 0;
        auto expect = [&](auto f) {
          const double ref = qphot::testing::gaussianExpectation(sx, f);
          CHECK(std::abs(m(k) - ref) <= 1e-6 * std::max(1.0, std::abs(ref)));
          ++k;
        };
        for (int i = 0; i < modes; ++i)
          for (int j = i; j < modes; ++j) expect([=](const Eigen::VectorXd& x) { return x(i) * x(j); });
        for (int i = 0; i < modes; ++i)
          for (int j = i; j < modes; ++j)
            expect([=](const Eigen::VectorXd& x) { return x(i) * x(i) * x(j) * x(j); });
        for (int i = 0; i < modes; ++i)
          for (int j = 0; j < modes; ++j)
            if (i != j) expect([=](const Eigen::VectorXd& x) { return x(i) * x(i) * x(i) * x(j); });
      }
    }
  }
  SUBCASE("non-zero mean rejected") {
    Vector mean = Vector::Zero(2);
    mean(0) = 0.3;
    CHECK_THROWS_AS(homodyneMoments(GaussianState(vacuum(1).cov(), mean)), ConfigError);
  }
}

TEST_CASE("passive operations conserve photon number") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const GaussianState st(qphot::testing::randomCovariance(2, rng));
    const double before = st.meanPhotonNumber();
    CHECK(std::abs(applySymplectic(st, beamSplitter5050(1)).meanPhotonNumber() - before) < 1e-10);
    CHECK(std::abs(applySymplectic(st, crystalSymplectic(2, 0.0, rng())).meanPhotonNumber() - before) < 1e-10);
  }
}

TEST_CASE("json serialization is row-major") {
  const auto st = squeezedInputState(1, {0.75, std::numbers::pi / 2});
  const auto j = toJson(st);
  CHECK(j["modes"] == 1);
  CHECK(j["cov"][0][1].get<double>() == st.cov()(0, 1));
  CHECK(j["cov"][1][0].get<double>() == st.cov()(1, 0));
  CHECK(j["mean"].size() == 2);
}

}  // TEST_SUITE
