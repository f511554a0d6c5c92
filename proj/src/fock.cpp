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

#include "qphot/fock.hpp"

#include "qphot/errors.hpp"
#include "qphot/log.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/core.h>
#include <numbers>

namespace qphot::fock {
namespace {

constexpr Complex kI{0.0, 1.0};

SparseMatrix sparse(const CMatrix& m) { return m.sparseView(); }

SparseMatrix identity(int d) {
  SparseMatrix id(d, d);
  id.setIdentity();
  return id;
}

CMatrix matrixPower(const CMatrix& a, int k) {
  CMatrix out = CMatrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) out = out * a;
  return out;
}

// gamma (conj(L) x L - 1/2 I x L^dag L - 1/2 (L^dag L)^T x I)
SparseMatrix dissipator(const CMatrix& l, double gamma) {
  const int d = static_cast<int>(l.rows());
  const SparseMatrix ls = sparse(l);
  const SparseMatrix lc = sparse(l.conjugate());
  const CMatrix ldl = l.adjoint() * l;
  const SparseMatrix id = identity(d);
  SparseMatrix out = Eigen::kroneckerProduct(lc, ls);
  out -= 0.5 * SparseMatrix(Eigen::kroneckerProduct(id, sparse(ldl)));
  out -= 0.5 * SparseMatrix(Eigen::kroneckerProduct(sparse(ldl.transpose()), id));
  return gamma * out;
}

}  // namespace

FockSpace::FockSpace(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 2) throw ConfigError("Fock cutoff must be >= 2, got " + std::to_string(cutoff));
}

Ladder ladderOperators(const FockSpace& space) {
  const int d = space.cutoff();
  Ladder out{CMatrix::Zero(d, d), CMatrix::Zero(d, d), CMatrix::Zero(d, d)};
  for (int k = 1; k < d; ++k) out.a(k - 1, k) = std::sqrt(static_cast<double>(k));
  out.adag = out.a.adjoint();
  for (int k = 0; k < d; ++k) out.number(k, k) = k;
  return out;
}

void ResonatorParams::validate() const {
  if (n < 2) throw ConfigError("drive order n must be >= 2");
  if (m < 2) throw ConfigError("dissipation order m must be >= 2");
  if (gammaM < 0.0) throw ConfigError("gamma_m must be >= 0");
  if (drive < 0.0) throw ConfigError("drive strength must be >= 0");
  if (!std::isfinite(detuning) || !std::isfinite(drive) || !std::isfinite(gammaM)) {
    throw ConfigError("resonator parameters must be finite");
  }
}

nlohmann::json ResonatorParams::toJson() const {
  return {{"n", n}, {"m", m}, {"detuning", detuning}, {"drive", drive}, {"gamma_m", gammaM}, {"gamma_1", kGamma1}};
}

CMatrix hamiltonian(const ResonatorParams& params, const FockSpace& space) {
  params.validate();
  if (space.cutoff() <= params.n) {
    throw ConfigError(fmt::format("cutoff {} too small for drive order {}", space.cutoff(), params.n));
  }
  const Ladder ops = ladderOperators(space);
  const CMatrix an = matrixPower(ops.a, params.n);
  return params.detuning * ops.number + kI * params.drive * (an - CMatrix(an.adjoint()));
}

Liouvillian::Liouvillian(const ResonatorParams& params, const FockSpace& space)
    : params_(params), cutoff_(space.cutoff()) {
  params.validate();
  const int d = cutoff_;
  if (d <= std::max(params.n, params.m)) {
    throw ConfigError(fmt::format("cutoff {} must exceed max(n, m) = {}", d, std::max(params.n, params.m)));
  }
  const Ladder ops = ladderOperators(space);
  const SparseMatrix h = sparse(hamiltonian(params, space));
  const SparseMatrix id = identity(d);
  matrix_ = -kI * SparseMatrix(Eigen::kroneckerProduct(id, h));
  matrix_ += kI * SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(h.transpose()), id));
  matrix_ += dissipator(ops.a, kGamma1);
  if (params.gammaM > 0.0) matrix_ += dissipator(matrixPower(ops.a, params.m), params.gammaM);
  matrix_.prune(Complex(0.0), 0.0);
  matrix_.makeCompressed();

  sectors_.assign(params.n, {});
  local_.resize(static_cast<std::size_t>(d) * d);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      const int g = j + k * d;
      auto& sector = sectors_[sectorOf(j, k)];
      local_[g] = static_cast<int>(sector.size());
      sector.push_back(g);
    }
  }
  // Column-major traversal keeps each sector list ascending.
}

int Liouvillian::sectorOf(int j, int k) const {
  const int n = params_.n;
  return (((j - k) % n) + n) % n;
}

SparseMatrix Liouvillian::sectorBlock(int s) const {
  const auto& idx = sectors_.at(s);
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    for (SparseMatrix::InnerIterator it(matrix_, idx[c]); it; ++it) {
      const int row = static_cast<int>(it.row());
      const int d = cutoff_;
      if (sectorOf(row % d, row / d) != s) throw NumericalError("Liouvillian mixes symmetry sectors");
      triplets.emplace_back(local_[row], static_cast<int>(c), it.value());
    }
  }
  SparseMatrix block(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
  block.setFromTriplets(triplets.begin(), triplets.end());
  return block;
}

CVector Liouvillian::gather(const CMatrix& rho, int s) const {
  const auto& idx = sectors_.at(s);
  CVector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = rho.data()[idx[i]];
  return out;
}

void Liouvillian::scatter(const CVector& block, int s, CMatrix& rho) const {
  const auto& idx = sectors_.at(s);
  for (std::size_t i = 0; i < idx.size(); ++i) rho.data()[idx[i]] = block(i);
}

CMatrix steadyState(const Liouvillian& liouvillian) {
  const int d = liouvillian.cutoff();
  const SparseMatrix block = liouvillian.sectorBlock(0);
  const auto& idx = liouvillian.sectorIndices(0);

  // Replace the first equation by the trace condition.
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (int c = 0; c < block.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(block, c); it; ++it) {
      if (it.row() != 0) triplets.emplace_back(static_cast<int>(it.row()), c, it.value());
    }
  }
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] % (d + 1) == 0) triplets.emplace_back(0, static_cast<int>(i), Complex(1.0));
  }
  SparseMatrix system(block.rows(), block.cols());
  system.setFromTriplets(triplets.begin(), triplets.end());
  system.makeCompressed();

  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(system);
  lu.factorize(system);
  if (lu.info() != Eigen::Success) {
    throw PhysicsError("steady state is not unique (singular Liouvillian block: " + lu.lastErrorMessage() + ")");
  }
  CVector rhs = CVector::Zero(block.rows());
  rhs(0) = 1.0;
  const CVector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw PhysicsError("steady-state solve failed");

  CMatrix rho = CMatrix::Zero(d, d);
  liouvillian.scatter(x, 0, rho);
  rho = 0.5 * (rho + CMatrix(rho.adjoint()));
  rho /= rho.trace().real();

  const CVector vec = Eigen::Map<const CVector>(rho.data(), rho.size());
  const double residual = (liouvillian.matrix() * vec).norm();
  const double scale = liouvillian.matrix().norm();
  if (residual > 1e-8 * scale) {
    throw PhysicsError(fmt::format("steady state is ill-determined (residual {:.3g} vs |L| {:.3g})", residual, scale));
  }
  return rho;
}

std::vector<Eigenpair> spectrum(const Liouvillian& liouvillian, int count, bool withMatrices) {
  const int n = liouvillian.sectorCount();
  const int d = liouvillian.cutoff();
  if (count < 1 || count > d * d) throw ConfigError("spectrum count out of range");
  std::vector<Eigenpair> all;
  std::vector<CMatrix> blocks(n);
  for (int s = 0; s < n; ++s) {
    blocks[s] = CMatrix(liouvillian.sectorBlock(s));
    Eigen::ComplexEigenSolver<CMatrix> solver(blocks[s], false);
    if (solver.info() != Eigen::Success) throw NumericalError(fmt::format("eigensolver failed in sector {}", s));
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) all.push_back({solver.eigenvalues()(i), s, {}});
  }
  std::sort(all.begin(), all.end(), [](const Eigenpair& a, const Eigenpair& b) {
    const double ra = std::abs(a.value.real());
    const double rb = std::abs(b.value.real());
    if (ra != rb) return ra < rb;
    return a.value.imag() < b.value.imag();
  });
  all.resize(count);

  if (withMatrices) {
    for (auto& pair : all) {
      // Inverse iteration on the owning sector.
      const CMatrix& block = blocks[pair.sector];
      const Complex shift = pair.value + Complex(1e-10 * (1.0 + std::abs(pair.value)), 0.0);
      Eigen::PartialPivLU<CMatrix> lu(block - shift * CMatrix::Identity(block.rows(), block.cols()));
      CVector v = CVector::Ones(block.rows()).normalized();
      for (int it = 0; it < 4; ++it) v = lu.solve(v).normalized();
      pair.matrix = CMatrix::Zero(d, d);
      liouvillian.scatter(v, pair.sector, pair.matrix);
      const Complex tr = pair.matrix.trace();
      if (pair.sector == 0 && std::abs(pair.value) < 1e-8 && std::abs(tr) > 1e-12) {
        pair.matrix /= tr;
      }
    }
  }
  return all;
}

DensityDiagnostics diagnose(const CMatrix& rho) {
  DensityDiagnostics out;
  out.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  out.traceError = std::abs(rho.trace() - Complex(1.0));
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (rho + CMatrix(rho.adjoint())), Eigen::EigenvaluesOnly);
  out.minEigenvalue = eig.eigenvalues().minCoeff();
  return out;
}

void requireDensity(const CMatrix& rho, double tolerance) {
  if (rho.rows() != rho.cols()) throw NumericalError("density matrix is not square");
  const auto diag = diagnose(rho);
  if (diag.hermiticity > std::max(1e-10, tolerance * 1e-2) || diag.traceError > tolerance ||
      diag.minEigenvalue < -tolerance) {
    throw NumericalError(fmt::format("not a density matrix (hermiticity {:.2g}, trace error {:.2g}, min eig {:.2g})",
                                     diag.hermiticity, diag.traceError, diag.minEigenvalue));
  }
}

double squeezedCoherentMean(Complex beta, Complex xi) {
  const double s = std::sinh(std::abs(xi));
  return std::norm(beta) + s * s;
}

double squeezedCoherentVariance(Complex beta, Complex xi) {
  const double r = std::abs(xi);
  const double theta = std::arg(xi);
  const double phi = std::arg(beta);
  const double sh = std::sinh(r);
  const double ch = std::cosh(r);
  return std::norm(beta) * (std::cosh(2 * r) - std::sinh(2 * r) * std::cos(theta - 2 * phi)) + 2 * sh * sh * ch * ch;
}

CVector squeezedCoherent(Complex beta, Complex xi, const FockSpace& space) {
  const int d = space.cutoff();
  const double mean = squeezedCoherentMean(beta, xi);
  const double sigma = std::sqrt(squeezedCoherentVariance(beta, xi));
  if (mean + 5.0 * sigma > d - 1) {
    throw NumericalError(fmt::format("cutoff {} too small for a state with <n> = {:.3g}, sigma = {:.3g}", d, mean, sigma));
  }
  // The state is annihilated by mu (a - beta) + nu (a^dag - beta^*).
  const double r = std::abs(xi);
  const double mu = std::cosh(r);
  const Complex nu = std::polar(std::sinh(r), std::arg(xi));
  const Complex lead = mu * beta + nu * std::conj(beta);
  CVector c(d);
  c(0) = std::exp(-0.5 * std::norm(beta) - nu / (2.0 * mu) * std::conj(beta) * std::conj(beta)) / std::sqrt(mu);
  if (d > 1) c(1) = lead * c(0) / mu;
  for (int k = 1; k + 1 < d; ++k) {
    c(k + 1) = (lead * c(k) - nu * std::sqrt(static_cast<double>(k)) * c(k - 1)) /
               (mu * std::sqrt(static_cast<double>(k + 1)));
  }
  const double norm = c.norm();
  if (std::abs(norm * norm - 1.0) > 1e-6) {
    log::warn(fmt::format("squeezed-coherent state lost {:.3g} of its norm to truncation", 1.0 - norm * norm));
  }
  return c / norm;
}

CVector coherent(Complex beta, const FockSpace& space) { return squeezedCoherent(beta, 0.0, space); }

CVector fockState(int k, const FockSpace& space) {
  if (k < 0 || k >= space.cutoff()) throw ConfigError("Fock index outside the cutoff");
  CVector out = CVector::Zero(space.cutoff());
  out(k) = 1.0;
  return out;
}

CMatrix projector(const CVector& psi) { return psi * psi.adjoint(); }

double meanPhoton(const CMatrix& rho) {
  double out = 0.0;
  for (Eigen::Index k = 0; k < rho.rows(); ++k) out += k * rho(k, k).real();
  return out;
}

double meanPhoton(const CVector& psi) {
  double out = 0.0;
  for (Eigen::Index k = 0; k < psi.size(); ++k) out += k * std::norm(psi(k));
  return out;
}

Complex expectA(const CMatrix& rho) {
  // tr(a rho) = sum_k sqrt(k) rho(k, k-1)
  Complex out = 0.0;
  for (Eigen::Index k = 1; k < rho.rows(); ++k) out += std::sqrt(static_cast<double>(k)) * rho(k, k - 1);
  return out;
}

Complex expectA(const CVector& psi) {
  Complex out = 0.0;
  for (Eigen::Index k = 1; k < psi.size(); ++k) out += std::sqrt(static_cast<double>(k)) * std::conj(psi(k - 1)) * psi(k);
  return out;
}

std::vector<double> populations(const CMatrix& rho) {
  std::vector<double> out(rho.rows());
  for (Eigen::Index k = 0; k < rho.rows(); ++k) out[k] = rho(k, k).real();
  return out;
}

namespace {

double mandelFromPopulations(const auto& p, Eigen::Index size) {
  double n1 = 0.0, n2 = 0.0;
  for (Eigen::Index k = 0; k < size; ++k) {
    n1 += k * p(k);
    n2 += static_cast<double>(k) * k * p(k);
  }
  if (n1 <= 1e-14) throw ConfigError("Mandel Q is undefined for the vacuum");
  return (n2 - n1 * n1 - n1) / n1;
}

}  // namespace

double mandelQ(const CMatrix& rho) {
  return mandelFromPopulations([&](Eigen::Index k) { return rho(k, k).real(); }, rho.rows());
}

double mandelQ(const CVector& psi) {
  return mandelFromPopulations([&](Eigen::Index k) { return std::norm(psi(k)); }, psi.size());
}

CMatrix rotate(const CMatrix& rho, double angle) {
  CMatrix out = rho;
  for (Eigen::Index k = 0; k < rho.cols(); ++k) {
    for (Eigen::Index j = 0; j < rho.rows(); ++j) out(j, k) *= std::polar(1.0, angle * static_cast<double>(j - k));
  }
  return out;
}

CVector rotate(const CVector& psi, double angle) {
  CVector out = psi;
  for (Eigen::Index k = 0; k < psi.size(); ++k) out(k) *= std::polar(1.0, angle * static_cast<double>(k));
  return out;
}

CMatrix pad(const CMatrix& rho, int cutoff) {
  if (cutoff < rho.rows()) throw ConfigError("pad target is smaller than the state");
  CMatrix out = CMatrix::Zero(cutoff, cutoff);
  out.topLeftCorner(rho.rows(), rho.cols()) = rho;
  return out;
}

CVector pad(const CVector& psi, int cutoff) {
  if (cutoff < psi.size()) throw ConfigError("pad target is smaller than the state");
  CVector out = CVector::Zero(cutoff);
  out.head(psi.size()) = psi;
  return out;
}

void WignerGrid::validate() const {
  if (!(xMax > xMin) || !(pMax > pMin)) throw ConfigError("Wigner grid range is empty");
  if (xPoints < 2 || pPoints < 2) throw ConfigError("Wigner grid needs at least 2 points per axis");
}

std::vector<double> WignerGrid::xs() const {
  std::vector<double> out(xPoints);
  for (int i = 0; i < xPoints; ++i) out[i] = xMin + (xMax - xMin) * i / (xPoints - 1);
  return out;
}

std::vector<double> WignerGrid::ps() const {
  std::vector<double> out(pPoints);
  for (int i = 0; i < pPoints; ++i) out[i] = pMin + (pMax - pMin) * i / (pPoints - 1);
  return out;
}

namespace {

// Means and standard deviations of x and p.
std::array<double, 4> quadratureMoments(const CMatrix& rho) {
  Complex a2 = 0.0;
  for (Eigen::Index k = 2; k < rho.rows(); ++k) a2 += std::sqrt(static_cast<double>(k * (k - 1))) * rho(k, k - 2);
  const Complex a1 = expectA(rho);
  const double n = meanPhoton(rho);
  const double sx = std::sqrt(std::max(0.0, (2 * a2.real() + 2 * n + 1) / 2 - 2 * a1.real() * a1.real()));
  const double sp = std::sqrt(std::max(0.0, (-2 * a2.real() + 2 * n + 1) / 2 - 2 * a1.imag() * a1.imag()));
  return {std::numbers::sqrt2 * a1.real(), sx, std::numbers::sqrt2 * a1.imag(), sp};
}

}  // namespace

WignerGrid autoGrid(const CMatrix& rho, int points) {
  const auto [mx, sx, mp, sp] = quadratureMoments(rho);
  const double extent = std::max(std::abs(mx) + 4 * sx, std::abs(mp) + 4 * sp) * (1.0 + 1e-9);
  return {-extent, extent, -extent, extent, points, points};
}

RMatrix wigner(const CMatrix& rho, const WignerGrid& grid) {
  grid.validate();
  const Eigen::Index dim = rho.rows();

  const auto [mx, sx, mp, sp] = quadratureMoments(rho);
  if (grid.xMin > mx - 4 * sx || grid.xMax < mx + 4 * sx || grid.pMin > mp - 4 * sp || grid.pMax < mp + 4 * sp) {
    log::warn("Wigner grid does not span 4 sigma around the state's mean");
  }

  const auto xs = grid.xs();
  const auto ps = grid.ps();
  RMatrix out(grid.xPoints, grid.pPoints);
  std::vector<Complex> w(dim);
  for (int i = 0; i < grid.xPoints; ++i) {
    for (int j = 0; j < grid.pPoints; ++j) {
      const Complex alpha = Complex(xs[i], ps[j]) / std::numbers::sqrt2;
      w[0] = std::exp(-2.0 * std::norm(alpha)) / std::numbers::pi;
      double acc = rho(0, 0).real() * w[0].real();
      for (Eigen::Index q = 1; q < dim; ++q) {
        w[q] = 2.0 * alpha * w[q - 1] / std::sqrt(static_cast<double>(q));
        acc += 2.0 * (rho(0, q) * w[q]).real();
      }
      for (Eigen::Index m = 1; m < dim; ++m) {
        const double sm = std::sqrt(static_cast<double>(m));
        Complex temp = w[m];
        w[m] = (2.0 * std::conj(alpha) * temp - sm * w[m - 1]) / sm;
        acc += (rho(m, m) * w[m]).real();
        for (Eigen::Index q = m + 1; q < dim; ++q) {
          const Complex next = (2.0 * alpha * w[q - 1] - sm * temp) / std::sqrt(static_cast<double>(q));
          temp = w[q];
          w[q] = next;
          acc += 2.0 * (rho(m, q) * w[q]).real();
        }
      }
      out(i, j) = acc;
    }
  }
  return out;
}

double cutoffDrift(const ResonatorParams& params, int cutoff) {
  const CMatrix small = steadyState(Liouvillian(params, FockSpace(cutoff)));
  const CMatrix large = steadyState(Liouvillian(params, FockSpace(2 * cutoff)));
  double drift = 0.0;
  for (int k = 0; k < cutoff; ++k) drift = std::max(drift, std::abs(small(k, k).real() - large(k, k).real()));
  double tail = 0.0;
  for (int k = cutoff; k < 2 * cutoff; ++k) tail += large(k, k).real();
  return drift + std::max(0.0, tail);
}

CutoffReport selectCutoff(const ResonatorParams& params, double meanPhotonEstimate, const CutoffOptions& options) {
  params.validate();
  if (options.growth <= 1.0) throw ConfigError("cutoff growth factor must exceed 1");
  CutoffReport report;
  const int floor = std::max(params.n, params.m) + 1;
  int d = std::max({options.minCutoff, static_cast<int>(std::ceil(4.0 * meanPhotonEstimate)), floor});
  // A start above the ceiling is still checked once at the ceiling.
  d = std::min(d, std::max(options.maxCutoff, floor));
  while (true) {
    const double drift = cutoffDrift(params, d);
    report.history.emplace_back(d, drift);
    report.cutoff = d;
    report.drift = drift;
    log::debug(fmt::format("cutoff {}: population drift {:.3g}", d, drift));
    if (drift < options.tolerance) {
      report.converged = true;
      return report;
    }
    const int next = static_cast<int>(std::ceil(d * options.growth));
    if (next > options.maxCutoff) return report;
    d = next;
  }
}

nlohmann::json toJson(const CMatrix& rho) {
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    nlohmann::json rowRe = nlohmann::json::array();
    nlohmann::json rowIm = nlohmann::json::array();
    for (Eigen::Index c = 0; c < rho.cols(); ++c) {
      rowRe.push_back(rho(r, c).real());
      rowIm.push_back(rho(r, c).imag());
    }
    re.push_back(std::move(rowRe));
    im.push_back(std::move(rowIm));
  }
  return {{"dimension", rho.rows()}, {"real", std::move(re)}, {"imag", std::move(im)}};
}

}  // namespace qphot::fock
