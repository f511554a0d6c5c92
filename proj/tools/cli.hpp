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


// Batch front end. Kept out of main() so tests can drive it in-process.

#pragma once

#include <string>
#include <vector>

namespace qphot::cli {

enum ExitCode : int { kOk = 0, kConfig = 2, kNumerical = 3, kPhysics = 4 };

int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace qphot::cli
