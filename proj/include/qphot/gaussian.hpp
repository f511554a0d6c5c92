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

// Zero-mean multimode Gaussian states in the quadrature ordering
// R = (x1, p1, ..., xN, pN), vacuum variance 1/2.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "json.hpp"

namespace qphot::gaussian {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kVacuumVariance = 0.5;

/// Block-diagonal symplectic form with N copies of [[0, 1], [-1, 0]].
Matrix symplecticForm(int modes);

class GaussianState {
 public:
  /// Validates symmetry (1e-12) and the uncertainty relation (1e-10).
  explicit GaussianState(Matrix cov);
  GaussianState(Matrix cov, Vector mean);

  /// Skips validation. Only for operations that preserve the invariants by
  /// construction (symplectic congruence, principal submatrices).
  static GaussianState trusted(Matrix cov);

  int modes() const { return static_cast<int>(cov_.rows() / 2); }
  const Matrix& cov() const { return cov_; }
  const Vector& mean() const { return mean_; }

  /// 1 / sqrt(det(2 cov)).
  double purity() const;
  /// tr(cov)/2 - N/2 for a zero-mean state.
  double meanPhotonNumber() const;
  /// Smallest eigenvalue of the Hermitian matrix cov + (i/2) Omega.
  double uncertaintyMinEigenvalue() const;

 private:
  GaussianState() = default;

  Matrix cov_;
  Vector mean_;
};

class Symplectic {
 public:
  /// Throws ConfigError unless S Omega S^T = Omega within 1e-10.
  explicit Symplectic(Matrix matrix);

  int modes() const { return static_cast<int>(matrix_.rows() / 2); }
  const Matrix& matrix() const { return matrix_; }

  /// -Omega S^T Omega.
  Symplectic inverse() const;
  /// Largest |S Omega S^T - Omega| entry.
  double symplecticDefect() const;

  friend Symplectic operator*(const Symplectic& lhs, const Symplectic& rhs);

 private:
  Matrix matrix_;
};

/// Squeezing strength xi (variance scale e^{+-xi}) and phase.
struct SqueezingSpec {
  double strength = 0.0;
  double phase = 0.0;

  double decibels() const;
};

/// 10 log10(e^{-xi}).
double squeezingDecibels(double strength);
/// Inverse of squeezingDecibels.
double strengthFromDecibels(double decibels);

GaussianState vacuum(int modes);

/// Product of N identical single-mode squeezed vacua with the given phase.
GaussianState squeezedInputState(int modes, const SqueezingSpec& spec);

/// Direct sum of two states; `first` occupies the leading modes.
GaussianState tensorProduct(const GaussianState& first, const GaussianState& second);

/// 50:50 coupler on 2N modes pairing mode i with mode N + i:
/// (r_i, r_{N+i}) -> ((r_i + r_{N+i})/sqrt2, (r_i - r_{N+i})/sqrt2).
Symplectic beamSplitter5050(int pairs);

/// Real 2N x 2N representation of a mode unitary a_i -> sum_j U_ij a_j.
Symplectic passiveFromUnitary(const Eigen::MatrixXcd& unitary);

/// Haar-distributed N x N unitary (QR of a complex Ginibre matrix with
/// phase-fixed R diagonal).
Eigen::MatrixXcd haarUnitary(int n, std::mt19937_64& rng);

/// Random passive x equal single-mode squeezers x random passive. Mode i of
/// the squeezer stage maps (x_i, p_i) -> (e^{xi/2} x_i, e^{-xi/2} p_i).
/// `draw` selects an independent network for the same seed.
Symplectic crystalSymplectic(int modes, double cavitySqueezing, std::uint64_t seed,
                             std::uint64_t draw = 0);

/// S = left * diag(d_1, 1/d_1, ..., d_N, 1/d_N) * right, with left and right
/// orthogonal symplectic and d_i >= 1 sorted descending.
struct BlochMessiah {
  Matrix left;
  Vector squeezing;
  Matrix right;
};

BlochMessiah blochMessiah(const Symplectic& s);

GaussianState applySymplectic(const GaussianState& state, const Symplectic& s);

/// Keeps the listed modes (in the given order).
GaussianState partialTrace(const GaussianState& state, std::span<const int> keep);

/// Number of entries produced by homodyneMoments for N modes:
/// N(N+1)/2 + N(N+1)/2 + N(N-1).
int observableCount(int modes);

/// Homodyne x-quadrature moments of a zero-mean state, in this order:
///   <x_i x_j>      for i <= j (lexicographic)
///   <x_i^2 x_j^2>  for i <= j (lexicographic)
///   <x_i^3 x_j>    for i != j (lexicographic)
/// Fourth moments follow from Isserlis' theorem on the x-x covariance block.
Vector homodyneMoments(const GaussianState& state);

nlohmann::json toJson(const GaussianState& state);

}  // namespace qphot::gaussian
