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


// Truncated Fock-space machinery for a single driven, nonlinearly damped
// resonator: ladder operators, the Liouvillian in column-stacked form, steady
// states, spectra, exact time evolution, squeezed-coherent kets, Wigner
// functions and Mandel Q.
//
// Units: gamma_1 = 1. Quadratures x = (a + a^dag)/sqrt2, p = (a - a^dag)/(i sqrt2),
// so the vacuum has variance 1/2 and W integrates to one over dx dp.

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace qphot::fock {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

/// Single-photon loss rate; everything else is measured against it.
inline constexpr double kGamma1 = 1.0;

class FockSpace {
 public:
  /// Basis |0> ... |cutoff-1>.
  explicit FockSpace(int cutoff);
  int cutoff() const { return cutoff_; }

 private:
  int cutoff_;
};

struct Ladder {
  CMatrix a;
  CMatrix adag;
  CMatrix number;
};

Ladder ladderOperators(const FockSpace& space);

/// H = detuning a^dag a + i drive (a^n - a^dag^n), dissipators D[a] and
/// gammaM D[a^m].
struct ResonatorParams {
  int n = 3;
  int m = 4;
  double detuning = 0.4;
  double drive = 0.0;
  double gammaM = 0.2;

  /// gammaM = 0 is accepted so plain damping can be expressed.
  void validate() const;
  nlohmann::json toJson() const;
};

CMatrix hamiltonian(const ResonatorParams& params, const FockSpace& space);

/// Column-stacked superoperator, vec(rho)[j + k D] = rho(j, k).
///
/// Every term conserves (j - k) mod n, so the matrix splits into n
/// independent sectors. Sector 0 holds the populations and the steady state.
class Liouvillian {
 public:
  Liouvillian(const ResonatorParams& params, const FockSpace& space);

  const SparseMatrix& matrix() const { return matrix_; }
  const ResonatorParams& params() const { return params_; }
  int cutoff() const { return cutoff_; }
  int sectorCount() const { return params_.n; }

  /// Global vec indices belonging to sector s, ascending.
  const std::vector<int>& sectorIndices(int s) const { return sectors_.at(s); }
  int sectorOf(int j, int k) const;
  SparseMatrix sectorBlock(int s) const;

  CVector gather(const CMatrix& rho, int s) const;
  void scatter(const CVector& block, int s, CMatrix& rho) const;

 private:
  ResonatorParams params_;
  int cutoff_;
  SparseMatrix matrix_;
  std::vector<std::vector<int>> sectors_;
  std::vector<int> local_;
};

/// Unit-trace, Hermitian solution of L vec(rho) = 0.
/// Throws PhysicsError when the null space is not one-dimensional.
CMatrix steadyState(const Liouvillian& liouvillian);

struct Eigenpair {
  Complex value;
  int sector = 0;
  /// Right eigenmatrix; empty unless requested. The zero mode is scaled to unit
  /// trace, the rest to unit Frobenius norm.
  CMatrix matrix;
};

/// The `count` eigenvalues with the smallest |Re|, ascending (ties by Im).
std::vector<Eigenpair> spectrum(const Liouvillian& liouvillian, int count, bool withMatrices = false);

/// Exact propagation rho(t + dt) = exp(L dt) rho(t), one dense exponential per
/// sector and step length, cached for reuse.
class Evolver {
 public:
  explicit Evolver(const Liouvillian& liouvillian);
  CMatrix step(const CMatrix& rho, double dt);
  /// Worst |tr rho - 1| seen before renormalizing.
  double maxTraceDrift() const { return maxDrift_; }

 private:
  const CMatrix& propagator(int sector, double dt);

  const Liouvillian& liouvillian_;
  std::vector<std::map<double, CMatrix>> cache_;
  double maxDrift_ = 0.0;
};

/// rho(t) at each requested time (ascending, >= 0).
std::vector<CMatrix> evolve(const CMatrix& rho0, const Liouvillian& liouvillian, const std::vector<double>& times);

struct DensityDiagnostics {
  double hermiticity = 0.0;
  double traceError = 0.0;
  double minEigenvalue = 0.0;
};

DensityDiagnostics diagnose(const CMatrix& rho);
/// Throws NumericalError when rho is not a density matrix within the given
/// tolerances.
void requireDensity(const CMatrix& rho, double tolerance = 1e-8);

/// D(beta) S(xi) |0>, S(xi) = exp[(xi^* a^2 - xi a^dag^2)/2].
/// Throws NumericalError when the photon distribution (mean + 5 sigma) does
/// not fit below the cutoff.
CVector squeezedCoherent(Complex beta, Complex xi, const FockSpace& space);
CVector coherent(Complex beta, const FockSpace& space);
CVector fockState(int k, const FockSpace& space);

/// Analytic photon-number mean and variance of D(beta) S(xi) |0>.
double squeezedCoherentMean(Complex beta, Complex xi);
double squeezedCoherentVariance(Complex beta, Complex xi);

CMatrix projector(const CVector& psi);

double meanPhoton(const CMatrix& rho);
double meanPhoton(const CVector& psi);
Complex expectA(const CMatrix& rho);
Complex expectA(const CVector& psi);
std::vector<double> populations(const CMatrix& rho);

/// (<n^2> - <n>^2 - <n>) / <n>; ConfigError for the vacuum.
double mandelQ(const CMatrix& rho);
double mandelQ(const CVector& psi);

/// Phase-space rotation by angle: rho_jk -> e^{i angle (j - k)} rho_jk, so
/// |beta> maps to |beta e^{i angle}>.
CMatrix rotate(const CMatrix& rho, double angle);
CVector rotate(const CVector& psi, double angle);

/// Zero-padding into a larger space.
CMatrix pad(const CMatrix& rho, int cutoff);
CVector pad(const CVector& psi, int cutoff);

struct WignerGrid {
  double xMin = -5.0;
  double xMax = 5.0;
  double pMin = -5.0;
  double pMax = 5.0;
  int xPoints = 101;
  int pPoints = 101;

  void validate() const;
  std::vector<double> xs() const;
  std::vector<double> ps() const;
};

/// Square grid centred on the origin that spans mean +- 4 sigma of rho.
WignerGrid autoGrid(const CMatrix& rho, int points = 101);

/// W(x_i, p_j) as a (xPoints x pPoints) matrix, via the Laguerre recurrence.
/// Logs a warning when the grid does not span mean +- 4 sigma of the state.
RMatrix wigner(const CMatrix& rho, const WignerGrid& grid);

struct CutoffOptions {
  int minCutoff = 32;
  double growth = 1.5;
  double tolerance = 1e-6;
  int maxCutoff = 160;
};

struct CutoffReport {
  int cutoff = 0;
  /// max_k |p_k(D) - p_k(2D)| plus the 2D population above D.
  double drift = 0.0;
  bool converged = false;
  std::vector<std::pair<int, double>> history;
};

/// Starts at max(minCutoff, 4 meanPhotonEstimate), capped at maxCutoff, and
/// grows until doubling the cutoff moves the steady-state populations by less
/// than the tolerance. minCutoff = maxCutoff checks a single fixed cutoff.
CutoffReport selectCutoff(const ResonatorParams& params, double meanPhotonEstimate, const CutoffOptions& options = {});

/// Population drift between the steady states at D and 2D.
double cutoffDrift(const ResonatorParams& params, int cutoff);

nlohmann::json toJson(const CMatrix& rho);

}  // namespace qphot::fock
