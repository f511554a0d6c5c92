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

#include "qphot/gaussian.hpp"

#include "qphot/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <string>

namespace qphot::gaussian {
namespace {

void requireModes(int modes) {
  if (modes < 1) throw ConfigError("mode count must be >= 1, got " + std::to_string(modes));
}

void requireSquareEven(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0 || m.rows() % 2 != 0) {
    throw ConfigError(std::string(what) + " must be a non-empty 2N x 2N matrix");
  }
}

Matrix squeezedBlock(const SqueezingSpec& spec) {
  const double c = std::cosh(spec.strength);
  const double s = std::sinh(spec.strength);
  Matrix block(2, 2);
  block << c + std::cos(spec.phase) * s, std::sin(spec.phase) * s,
      std::sin(spec.phase) * s, c - std::cos(spec.phase) * s;
  return kVacuumVariance * block;
}

}  // namespace

Matrix symplecticForm(int modes) {
  requireModes(modes);
  Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
  for (int i = 0; i < modes; ++i) {
    omega(2 * i, 2 * i + 1) = 1.0;
    omega(2 * i + 1, 2 * i) = -1.0;
  }
  return omega;
}

// ---------------------------------------------------------------------------
// GaussianState

GaussianState::GaussianState(Matrix cov) : GaussianState(std::move(cov), Vector()) {}

GaussianState::GaussianState(Matrix cov, Vector mean) : cov_(std::move(cov)), mean_(std::move(mean)) {
  requireSquareEven(cov_, "covariance");
  if (mean_.size() == 0) mean_ = Vector::Zero(cov_.rows());
  if (mean_.size() != cov_.rows()) throw ConfigError("mean length does not match covariance");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("covariance is not symmetric");
  }
  if (uncertaintyMinEigenvalue() < -1e-10) {
    throw ConfigError("covariance violates the uncertainty relation");
  }
}

GaussianState GaussianState::trusted(Matrix cov) {
  GaussianState state;
  state.mean_ = Vector::Zero(cov.rows());
  state.cov_ = std::move(cov);
  return state;
}

double GaussianState::purity() const {
  return 1.0 / std::sqrt((2.0 * cov_).determinant());
}

double GaussianState::meanPhotonNumber() const {
  return 0.5 * cov_.trace() - 0.5 * modes() + 0.5 * mean_.squaredNorm();
}

double GaussianState::uncertaintyMinEigenvalue() const {
  const Eigen::MatrixXcd h = cov_.cast<std::complex<double>>() +
                             std::complex<double>(0.0, 0.5) * symplecticForm(modes()).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Symplectic

Symplectic::Symplectic(Matrix matrix) : matrix_(std::move(matrix)) {
  requireSquareEven(matrix_, "symplectic matrix");
  if (symplecticDefect() > 1e-10) throw ConfigError("matrix is not symplectic");
}

double Symplectic::symplecticDefect() const {
  const Matrix omega = symplecticForm(modes());
  return (matrix_ * omega * matrix_.transpose() - omega).cwiseAbs().maxCoeff();
}

Symplectic Symplectic::inverse() const {
  const Matrix omega = symplecticForm(modes());
  return Symplectic(-omega * matrix_.transpose() * omega);
}

Symplectic operator*(const Symplectic& lhs, const Symplectic& rhs) {
  if (lhs.modes() != rhs.modes()) throw ConfigError("symplectic dimension mismatch");
  return Symplectic(lhs.matrix_ * rhs.matrix_);
}

// ---------------------------------------------------------------------------
// Squeezing

double SqueezingSpec::decibels() const { return squeezingDecibels(strength); }

double squeezingDecibels(double strength) { return 10.0 * std::log10(std::exp(-strength)); }

double strengthFromDecibels(double decibels) { return -decibels * std::log(10.0) / 10.0; }

// ---------------------------------------------------------------------------
// States and transformations

GaussianState vacuum(int modes) {
  requireModes(modes);
  return GaussianState::trusted(kVacuumVariance * Matrix::Identity(2 * modes, 2 * modes));
}

GaussianState squeezedInputState(int modes, const SqueezingSpec& spec) {
  requireModes(modes);
  if (spec.strength < 0.0) throw ConfigError("squeezing strength must be >= 0");
  const Matrix block = squeezedBlock(spec);
  Matrix cov = Matrix::Zero(2 * modes, 2 * modes);
  for (int i = 0; i < modes; ++i) cov.block(2 * i, 2 * i, 2, 2) = block;
  return GaussianState::trusted(std::move(cov));
}

GaussianState tensorProduct(const GaussianState& first, const GaussianState& second) {
  const auto a = first.cov().rows();
  const auto b = second.cov().rows();
  Matrix cov = Matrix::Zero(a + b, a + b);
  cov.topLeftCorner(a, a) = first.cov();
  cov.bottomRightCorner(b, b) = second.cov();
  Vector mean(a + b);
  mean << first.mean(), second.mean();
  GaussianState out = GaussianState::trusted(std::move(cov));
  if (mean.cwiseAbs().maxCoeff() != 0.0) return GaussianState(out.cov(), mean);
  return out;
}

Symplectic beamSplitter5050(int pairs) {
  requireModes(pairs);
  const double h = 1.0 / std::numbers::sqrt2;
  const int n2 = 2 * pairs;
  Matrix s = Matrix::Zero(2 * n2, 2 * n2);
  for (int i = 0; i < pairs; ++i) {
    for (int q = 0; q < 2; ++q) {
      const int loop = 2 * i + q;
      const int in = 2 * (pairs + i) + q;
      s(loop, loop) = h;
      s(loop, in) = h;
      s(in, loop) = h;
      s(in, in) = -h;
    }
  }
  return Symplectic(std::move(s));
}

Symplectic passiveFromUnitary(const Eigen::MatrixXcd& unitary) {
  if (unitary.rows() != unitary.cols() || unitary.rows() == 0) {
    throw ConfigError("unitary must be square and non-empty");
  }
  const auto n = unitary.rows();
  Matrix s(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double x = unitary(i, j).real();
      const double y = unitary(i, j).imag();
      s(2 * i, 2 * j) = x;
      s(2 * i, 2 * j + 1) = -y;
      s(2 * i + 1, 2 * j) = y;
      s(2 * i + 1, 2 * j + 1) = x;
    }
  }
  return Symplectic(std::move(s));
}

Eigen::MatrixXcd haarUnitary(int n, std::mt19937_64& rng) {
  requireModes(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd z(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = std::complex<double>(re, im) / std::numbers::sqrt2;
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

Symplectic crystalSymplectic(int modes, double cavitySqueezing, std::uint64_t seed, std::uint64_t draw) {
  requireModes(modes);
  if (cavitySqueezing < 0.0) throw ConfigError("cavity squeezing must be >= 0");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32)};
  std::mt19937_64 rng(seq);
  const Matrix o1 = passiveFromUnitary(haarUnitary(modes, rng)).matrix();
  const Matrix o2 = passiveFromUnitary(haarUnitary(modes, rng)).matrix();
  Vector diag(2 * modes);
  for (int i = 0; i < modes; ++i) {
    diag(2 * i) = std::exp(0.5 * cavitySqueezing);
    diag(2 * i + 1) = std::exp(-0.5 * cavitySqueezing);
  }
  return Symplectic(o1 * diag.asDiagonal() * o2);
}

BlochMessiah blochMessiah(const Symplectic& s) {
  const int n = s.modes();
  const Matrix& m = s.matrix();
  const Matrix omega = symplecticForm(n);

  // Polar decomposition S = O P with P symmetric positive definite symplectic.
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix orth = svd.matrixU() * svd.matrixV().transpose();
  const Matrix p = svd.matrixV() * svd.singularValues().asDiagonal() * svd.matrixV().transpose();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (p + p.transpose()));
  const Vector& values = eig.eigenvalues();
  const Matrix& vectors = eig.eigenvectors();

  // Eigenvectors with eigenvalue > 1 span an isotropic subspace; their
  // partners Omega^T u carry the reciprocal eigenvalue. The eigenvalue-1
  // subspace needs an explicit symplectic Gram-Schmidt pass.
  constexpr double kUnitTol = 1e-8;
  std::vector<std::pair<double, Vector>> stretched;
  std::vector<Vector> unitSpace;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (values(k) > 1.0 + kUnitTol) {
      stretched.emplace_back(values(k), vectors.col(k));
    } else if (values(k) >= 1.0 - kUnitTol) {
      unitSpace.push_back(vectors.col(k));
    }
  }
  std::stable_sort(stretched.begin(), stretched.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });

  Matrix basis = Matrix::Zero(2 * n, 2 * n);
  Vector squeezing = Vector::Ones(n);
  int filled = 0;
  for (const auto& [value, u] : stretched) {
    if (filled >= n) break;
    basis.col(2 * filled) = u;
    basis.col(2 * filled + 1) = omega.transpose() * u;
    squeezing(filled) = value;
    ++filled;
  }
  for (const Vector& candidate : unitSpace) {
    if (filled >= n) break;
    Vector v = candidate;
    for (int pass = 0; pass < 2; ++pass) {
      for (int k = 0; k < 2 * filled; ++k) v -= basis.col(k).dot(v) * basis.col(k);
    }
    const double norm = v.norm();
    if (norm < 1e-6) continue;
    v /= norm;
    basis.col(2 * filled) = v;
    basis.col(2 * filled + 1) = omega.transpose() * v;
    ++filled;
  }
  if (filled != n) throw NumericalError("Bloch-Messiah decomposition failed to span the phase space");

  return BlochMessiah{orth * basis, squeezing, basis.transpose()};
}

GaussianState applySymplectic(const GaussianState& state, const Symplectic& s) {
  if (state.modes() != s.modes()) {
    throw ConfigError("symplectic acts on " + std::to_string(s.modes()) + " modes, state has " +
                      std::to_string(state.modes()));
  }
  Matrix cov = s.matrix() * state.cov() * s.matrix().transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  if (state.mean().cwiseAbs().maxCoeff() != 0.0) return GaussianState(cov, s.matrix() * state.mean());
  return GaussianState::trusted(std::move(cov));
}

GaussianState partialTrace(const GaussianState& state, std::span<const int> keep) {
  if (keep.empty()) throw ConfigError("partial trace needs at least one kept mode");
  std::set<int> seen;
  for (int mode : keep) {
    if (mode < 0 || mode >= state.modes()) throw ConfigError("mode index " + std::to_string(mode) + " out of range");
    if (!seen.insert(mode).second) throw ConfigError("mode index " + std::to_string(mode) + " repeated");
  }
  const auto k = static_cast<Eigen::Index>(keep.size());
  Matrix cov(2 * k, 2 * k);
  Vector mean(2 * k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      cov.block(2 * a, 2 * b, 2, 2) = state.cov().block(2 * keep[a], 2 * keep[b], 2, 2);
    }
    mean.segment(2 * a, 2) = state.mean().segment(2 * keep[a], 2);
  }
  if (mean.cwiseAbs().maxCoeff() != 0.0) return GaussianState(cov, mean);
  return GaussianState::trusted(std::move(cov));
}

int observableCount(int modes) {
  requireModes(modes);
  return modes * (modes + 1) + modes * (modes - 1);
}

Vector homodyneMoments(const GaussianState& state) {
  if (state.mean().cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("homodyne moments require a zero-mean state");
  }
  const int n = state.modes();
  const Matrix& c = state.cov();
  auto sx = [&](int i, int j) { return c(2 * i, 2 * j); };
  Vector out(observableCount(n));
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out(k++) = sx(i, j);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) out(k++) = sx(i, i) * sx(j, j) + 2.0 * sx(i, j) * sx(i, j);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) out(k++) = 3.0 * sx(i, i) * sx(i, j);
  return out;
}

nlohmann::json toJson(const GaussianState& state) {
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index i = 0; i < state.cov().rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < state.cov().cols(); ++j) row.push_back(state.cov()(i, j));
    cov.push_back(std::move(row));
  }
  nlohmann::json mean = nlohmann::json::array();
  for (Eigen::Index i = 0; i < state.mean().size(); ++i) mean.push_back(state.mean()(i));
  return {{"modes", state.modes()}, {"cov", std::move(cov)}, {"mean", std::move(mean)}};
}

}  // namespace qphot::gaussian
