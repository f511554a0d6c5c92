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

// Dataset ingestion, normalization and result serialization.

#pragma once

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qphot::io {

enum class SeriesFormat { PlainText, CsvColumn };
enum class Normalization { None, MinMax01 };

struct TimeSeries {
  std::vector<double> values;
  std::string sourcePath;
  /// FNV-1a 64-bit hash of the source bytes, hex encoded.
  std::string hash;
  Normalization normalization = Normalization::None;
  double rawMin = 0.0;
  double rawMax = 0.0;
};

/// Plain text holds one value per line; blank lines and lines starting
/// with '#' are skipped. CSV takes column `column` (0-based) and skips a
/// first row that does not parse as a number.
TimeSeries loadSeries(const std::filesystem::path& path, SeriesFormat format, int column = 0);

/// Affine map x -> (x - lo) / (hi - lo) and its inverse.
struct MinMaxFit {
  double lo = 0.0;
  double hi = 1.0;

  double apply(double raw) const { return (raw - lo) / (hi - lo); }
  double invert(double scaled) const { return lo + scaled * (hi - lo); }
};

struct NormalizedSeries {
  TimeSeries series;
  MinMaxFit fit;
  std::size_t clipped = 0;
};

/// Fits min/max on values[fitBegin, fitEnd) only, applies the map to the
/// whole series and clips values that land outside [0, 1].
NormalizedSeries normalizeMinMax01(const TimeSeries& series, std::size_t fitBegin, std::size_t fitEnd);

struct Split {
  int washout = 300;
  int train = 3000;
  int test = 700;

  /// Input steps consumed: washout + train + test. One-step-ahead targets
  /// need one more value than that.
  std::size_t steps() const { return static_cast<std::size_t>(washout + train + test); }
  void validate(std::size_t seriesLength) const;
};

/// Chaotic stand-in for the Santa Fe laser series: intensity x(t)^2 of the
/// Lorenz system (sigma 10, rho 28, beta 8/3) integrated with RK4 at step
/// 0.01, sampled every 0.08 time units after a 1000-sample transient. The
/// seed perturbs the initial condition.
TimeSeries syntheticChaoticSeries(std::size_t length, std::uint64_t seed = 0);

std::string fnv1a64(std::string_view bytes);

/// Shortest decimal representation that round-trips.
std::string formatDouble(double value);

using Cell = std::variant<std::int64_t, double, std::string>;

/// Homogeneous result rows with a fixed column order.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void addRow(std::vector<Cell> row);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  std::string toCsv() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Writes atomically enough for batch use (truncate + write). Throws
/// ConfigError when the path is not writable.
void writeCsv(const Table& table, const std::filesystem::path& path);
void writeJson(const nlohmann::json& json, const std::filesystem::path& path);
void writeText(std::string_view text, const std::filesystem::path& path);

/// Run manifest: config echo, seeds, dataset hash, artifact version.
nlohmann::json makeManifest(std::string_view command, const nlohmann::json& configEcho,
                            const nlohmann::json& seeds, std::string_view datasetHash);

}  // namespace qphot::io
