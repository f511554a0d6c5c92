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

// Sectioned key-value experiment configuration. The on-disk format is INI:
//
//   ; comment
//   [qrc]
//   modes = 12
//   cavity_squeezing = 0, 1.5
//
// Lists are comma separated. The same content can be given as JSON
// ({"qrc": {"modes": 12, "cavity_squeezing": [0, 1.5]}}), which is how run
// manifests echo the configuration.

#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qphot {

class Config {
 public:
  static Config fromIniString(const std::string& text);
  static Config fromIniFile(const std::filesystem::path& path);
  static Config fromJson(const nlohmann::json& json);
  /// Dispatches on the extension: ".json" is JSON, anything else INI.
  static Config fromFile(const std::filesystem::path& path);

  nlohmann::json toJson() const;

  bool has(const std::string& section, const std::string& key) const;
  void set(const std::string& section, const std::string& key, std::string value);
  std::optional<std::string> raw(const std::string& section, const std::string& key) const;

  std::string getString(const std::string& section, const std::string& key, const std::string& fallback) const;
  double getDouble(const std::string& section, const std::string& key, double fallback) const;
  int getInt(const std::string& section, const std::string& key, int fallback) const;
  std::uint64_t getUint(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool getBool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> getDoubleList(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
  std::vector<int> getIntList(const std::string& section, const std::string& key,
                              const std::vector<int>& fallback) const;

  /// Throws ConfigError naming the first key of `section` not in `allowed`.
  void requireKnownKeys(const std::string& section, std::span<const std::string_view> allowed) const;
  /// Throws ConfigError naming the first section not in `allowed`.
  void requireKnownSections(std::span<const std::string_view> allowed) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const { return sections_; }

  friend bool operator==(const Config&, const Config&) = default;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace qphot
