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

#pragma once

#include <stdexcept>
#include <string>

namespace qphot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, invalid parameter values, unreadable
/// files, dimension mismatches at the API boundary.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed (singular system, solver non-convergence,
/// norm underflow).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The requested physics does not have the structure the experiment needs
/// (no metastable gap, cutoff not converged, ambiguous steady state).
class PhysicsError : public Error {
 public:
  using Error::Error;
};

}  // namespace qphot
