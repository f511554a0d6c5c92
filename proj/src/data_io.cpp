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

#include "qphot/data_io.hpp"

#include "qphot/errors.hpp"
#include "qphot/log.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace qphot::io {
namespace {

std::string_view trimView(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parseDouble(std::string_view text, double& out) {
  text = trimView(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

std::string readAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string csvEscape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::ofstream openForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

}  // namespace

TimeSeries loadSeries(const std::filesystem::path& path, SeriesFormat format, int column) {
  if (column < 0) throw ConfigError("dataset column must be >= 0");
  const std::string bytes = readAll(path);
  TimeSeries series;
  series.sourcePath = path.string();
  series.hash = fnv1a64(bytes);

  std::istringstream in(bytes);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const std::string_view trimmed = trimView(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::string_view field = trimmed;
    if (format == SeriesFormat::CsvColumn) {
      std::size_t start = 0;
      for (int c = 0; c < column; ++c) {
        const auto comma = trimmed.find(',', start);
        if (comma == std::string_view::npos) {
          throw ConfigError(path.string() + ": line " + std::to_string(lineNo) + " has no column " +
                            std::to_string(column));
        }
        start = comma + 1;
      }
      const auto end = trimmed.find(',', start);
      field = trimmed.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    }
    double value = 0.0;
    if (!parseDouble(field, value)) {
      if (format == SeriesFormat::CsvColumn && series.values.empty() && lineNo == 1) continue;  // header
      throw ConfigError(path.string() + ": line " + std::to_string(lineNo) + ": cannot parse '" +
                        std::string(field) + "' as a number");
    }
    series.values.push_back(value);
  }
  if (series.values.empty()) throw ConfigError(path.string() + ": no values");
  const auto [lo, hi] = std::minmax_element(series.values.begin(), series.values.end());
  series.rawMin = *lo;
  series.rawMax = *hi;
  return series;
}

NormalizedSeries normalizeMinMax01(const TimeSeries& series, std::size_t fitBegin, std::size_t fitEnd) {
  if (fitBegin >= fitEnd || fitEnd > series.values.size()) {
    throw ConfigError("normalization fit range is empty or out of bounds");
  }
  const auto first = series.values.begin() + static_cast<std::ptrdiff_t>(fitBegin);
  const auto last = series.values.begin() + static_cast<std::ptrdiff_t>(fitEnd);
  const auto [lo, hi] = std::minmax_element(first, last);
  if (!(*hi > *lo)) throw ConfigError("normalization fit range is constant");

  NormalizedSeries out;
  out.fit = MinMaxFit{*lo, *hi};
  out.series = series;
  out.series.normalization = Normalization::MinMax01;
  out.series.rawMin = *lo;
  out.series.rawMax = *hi;
  for (double& v : out.series.values) {
    const double scaled = out.fit.apply(v);
    v = std::clamp(scaled, 0.0, 1.0);
    if (v != scaled) ++out.clipped;
  }
  if (out.clipped > 0) {
    log::warn(std::to_string(out.clipped) + " value(s) outside the normalization fit range were clipped to [0, 1]");
  }
  return out;
}

void Split::validate(std::size_t seriesLength) const {
  if (washout < 0 || train < 1 || test < 0) throw ConfigError("split sizes must be washout >= 0, train >= 1, test >= 0");
  if (steps() + 1 > seriesLength) {
    throw ConfigError("dataset has " + std::to_string(seriesLength) + " values; split needs " +
                      std::to_string(steps() + 1) + " (washout + train + test + 1 for the last target)");
  }
}

TimeSeries syntheticChaoticSeries(std::size_t length, std::uint64_t seed) {
  using State = std::array<double, 3>;
  auto rhs = [](const State& s) {
    return State{10.0 * (s[1] - s[0]), s[0] * (28.0 - s[2]) - s[1], s[0] * s[1] - 8.0 / 3.0 * s[2]};
  };
  auto axpy = [](const State& s, double h, const State& k) {
    return State{s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]};
  };
  State s{1.0, 1.0, 1.0};
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.5, 0.5);
    for (double& c : s) c += jitter(rng);
  }
  constexpr double kStep = 0.01;
  constexpr int kSubsteps = 8;
  constexpr std::size_t kTransient = 1000;

  TimeSeries series;
  series.sourcePath = "synthetic:lorenz-intensity";
  series.values.reserve(length);
  for (std::size_t k = 0; k < length + kTransient; ++k) {
    for (int sub = 0; sub < kSubsteps; ++sub) {
      const State k1 = rhs(s);
      const State k2 = rhs(axpy(s, 0.5 * kStep, k1));
      const State k3 = rhs(axpy(s, 0.5 * kStep, k2));
      const State k4 = rhs(axpy(s, kStep, k3));
      for (int i = 0; i < 3; ++i) s[i] += kStep / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (k >= kTransient) series.values.push_back(s[0] * s[0]);
  }
  std::string bytes;
  for (double v : series.values) bytes += formatDouble(v) + "\n";
  series.hash = fnv1a64(bytes);
  if (!series.values.empty()) {
    const auto [lo, hi] = std::minmax_element(series.values.begin(), series.values.end());
    series.rawMin = *lo;
    series.rawMax = *hi;
  }
  return series;
}

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string formatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw ConfigError("table needs at least one column");
}

void Table::addRow(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw ConfigError("row has " + std::to_string(row.size()) + " cells, table has " +
                      std::to_string(columns_.size()) + " columns");
  }
  if (!rows_.empty()) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].index() != rows_.front()[i].index()) {
        throw ConfigError("column '" + columns_[i] + "' changes type between rows");
      }
    }
  }
  rows_.push_back(std::move(row));
}

std::string Table::toCsv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += csvEscape(columns_[i]);
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out += formatDouble(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
              out += csvEscape(v);
            } else {
              out += std::to_string(v);
            }
          },
          row[i]);
    }
    out += '\n';
  }
  return out;
}

void writeCsv(const Table& table, const std::filesystem::path& path) { writeText(table.toCsv(), path); }

void writeJson(const nlohmann::json& json, const std::filesystem::path& path) { writeText(json.dump(2) + "\n", path); }

void writeText(std::string_view text, const std::filesystem::path& path) {
  auto out = openForWrite(path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw ConfigError("failed writing " + path.string());
}

nlohmann::json makeManifest(std::string_view command, const nlohmann::json& configEcho, const nlohmann::json& seeds,
                            std::string_view datasetHash) {
  return {{"command", command},
          {"version", QPHOT_VERSION},
          {"config", configEcho},
          {"seeds", seeds},
          {"dataset_hash", datasetHash}};
}

}  // namespace qphot::io
