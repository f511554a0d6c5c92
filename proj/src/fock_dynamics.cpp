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

#include "qphot/errors.hpp"
#include "qphot/fock.hpp"
#include "qphot/log.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <fmt/core.h>

#include <algorithm>
#include <cmath>

namespace qphot::fock {

Evolver::Evolver(const Liouvillian& liouvillian)
    : liouvillian_(liouvillian), cache_(static_cast<std::size_t>(liouvillian.sectorCount())) {}

const CMatrix& Evolver::propagator(int sector, double dt) {
  auto& slot = cache_[sector];
  // Grid differences like 0.3 - 0.2 should hit the 0.1 entry.
  const double tol = 1e-12 * std::max(1.0, dt);
  auto it = slot.lower_bound(dt - tol);
  if (it == slot.end() || it->first > dt + tol) {
    const CMatrix block = CMatrix(liouvillian_.sectorBlock(sector)) * dt;
    CMatrix prop = block.exp();
    if (!prop.allFinite()) throw NumericalError(fmt::format("propagator over dt = {} is not finite", dt));
    it = slot.emplace(dt, std::move(prop)).first;
  }
  return it->second;
}

CMatrix Evolver::step(const CMatrix& rho, double dt) {
  const int d = liouvillian_.cutoff();
  if (rho.rows() != d || rho.cols() != d) throw ConfigError("state and Liouvillian cutoffs differ");
  if (dt < 0.0) throw ConfigError("negative time step");
  if (dt == 0.0) return rho;
  CMatrix out = CMatrix::Zero(d, d);
  for (int s = 0; s < liouvillian_.sectorCount(); ++s) {
    const CVector block = liouvillian_.gather(rho, s);
    // States built from a few lobes often leave whole sectors empty.
    if (block.cwiseAbs().maxCoeff() == 0.0) continue;
    liouvillian_.scatter(propagator(s, dt) * block, s, out);
  }
  const double tr = out.trace().real();
  const double drift = std::abs(tr - rho.trace().real());
  maxDrift_ = std::max(maxDrift_, drift);
  if (drift > 1e-9) log::debug(fmt::format("trace drift {:.3g} over dt = {}, renormalized", drift, dt));
  if (!(tr > 0.0)) throw NumericalError("evolved state lost its trace");
  out = 0.5 * (out + CMatrix(out.adjoint()));
  return out * (rho.trace().real() / tr);
}

std::vector<CMatrix> evolve(const CMatrix& rho0, const Liouvillian& liouvillian, const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1])) {
      throw ConfigError("evolution times must be ascending and >= 0");
    }
  }
  Evolver evolver(liouvillian);
  std::vector<CMatrix> out;
  out.reserve(times.size());
  CMatrix rho = rho0;
  double t = 0.0;
  for (double target : times) {
    rho = evolver.step(rho, target - t);
    t = target;
    out.push_back(rho);
  }
  if (evolver.maxTraceDrift() > 1e-9) {
    log::info(fmt::format("evolve: worst per-step trace drift {:.3g} (renormalized)", evolver.maxTraceDrift()));
  }
  return out;
}

}  // namespace qphot::fock
