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

// Independent reference computations used only by the test suites.

#pragma once

#include "qphot/fock.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace qphot::testing {

/// Gauss-Hermite nodes/weights for the weight e^{-t^2} (Golub-Welsch).
struct GaussHermite {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

inline GaussHermite gaussHermite(int order) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(k / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermite gh;
  gh.nodes = eig.eigenvalues();
  gh.weights = std::sqrt(std::numbers::pi) * eig.eigenvectors().row(0).transpose().array().square();
  return gh;
}

/// E[f(x)] for x ~ N(0, sigma) by tensor-product Gauss-Hermite quadrature.
/// Exact for polynomials of degree < 2 * order in each coordinate.
inline double gaussianExpectation(const Eigen::MatrixXd& sigma,
                                  const std::function<double(const Eigen::VectorXd&)>& f, int order = 12) {
  const auto dim = static_cast<int>(sigma.rows());
  const Eigen::MatrixXd chol = sigma.llt().matrixL();
  const GaussHermite gh = gaussHermite(order);
  std::vector<int> idx(dim, 0);
  double total = 0.0;
  while (true) {
    Eigen::VectorXd z(dim);
    double w = 1.0;
    for (int d = 0; d < dim; ++d) {
      z(d) = std::numbers::sqrt2 * gh.nodes(idx[d]);
      w *= gh.weights(idx[d]);
    }
    total += w * f(chol * z);
    int d = 0;
    while (d < dim && ++idx[d] == order) idx[d++] = 0;
    if (d == dim) break;
  }
  return total / std::pow(std::numbers::pi, dim / 2.0);
}

/// Random physical covariance: random symplectic congruence of a thermal
/// state, built from elementary single-mode squeezers and two-mode rotations
/// so that it does not reuse the library's construction path.
inline Eigen::MatrixXd randomCovariance(int modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const int dim = 2 * modes;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < modes; ++i) cov(2 * i, 2 * i) = cov(2 * i + 1, 2 * i + 1) = 0.5 + 2.0 * uni(rng);
  for (int layer = 0; layer < 3; ++layer) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(dim, dim);
    for (int i = 0; i < modes; ++i) {
      const double r = 0.8 * uni(rng);
      const double th = 2.0 * std::numbers::pi * uni(rng);
      // Rotation by th, squeeze by r, rotate back.
      Eigen::Matrix2d rot;
      rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      const Eigen::Matrix2d sq = Eigen::Vector2d(std::exp(r), std::exp(-r)).asDiagonal();
      s.block(2 * i, 2 * i, 2, 2) = rot * sq * rot.transpose();
    }
    for (int i = 0; i + 1 < modes; ++i) {
      const double th = 2.0 * std::numbers::pi * uni(rng);
      Eigen::MatrixXd bs = Eigen::MatrixXd::Identity(dim, dim);
      for (int q = 0; q < 2; ++q) {
        const int a = 2 * i + q;
        const int b = 2 * (i + 1) + q;
        bs(a, a) = std::cos(th);
        bs(a, b) = std::sin(th);
        bs(b, a) = -std::sin(th);
        bs(b, b) = std::cos(th);
      }
      s = bs * s;
    }
    cov = s * cov * s.transpose();
  }
  return 0.5 * (cov + cov.transpose());
}

/// a^k by repeated multiplication.
inline fock::CMatrix power(const fock::CMatrix& a, int k) {
  fock::CMatrix out = fock::CMatrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out *= a;
  return out;
}

/// Master-equation right-hand side written term by term.
inline fock::CMatrix lindbladRhs(const fock::CMatrix& rho, const fock::CMatrix& h,
                                 const std::vector<std::pair<fock::CMatrix, double>>& jumps) {
  fock::CMatrix out = -fock::Complex(0.0, 1.0) * (h * rho - rho * h);
  for (const auto& [l, g] : jumps) {
    const fock::CMatrix ldl = l.adjoint() * l;
    out += g * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

// Superoperator assembled column by column from basis matrices |j><k|.
inline fock::CMatrix bruteLiouvillian(const fock::ResonatorParams& p, int d) {
  const fock::CMatrix h = fock::hamiltonian(p, fock::FockSpace(d));
  const fock::Ladder ops = fock::ladderOperators(fock::FockSpace(d));
  std::vector<std::pair<fock::CMatrix, double>> jumps{{ops.a, 1.0}, {power(ops.a, p.m), p.gammaM}};
  fock::CMatrix out(d * d, d * d);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      fock::CMatrix e = fock::CMatrix::Zero(d, d);
      e(j, k) = 1.0;
      const fock::CMatrix r = lindbladRhs(e, h, jumps);
      out.col(j + k * d) = Eigen::Map<const fock::CVector>(r.data(), d * d);
    }
  }
  return out;
}

}  // namespace qphot::testing
