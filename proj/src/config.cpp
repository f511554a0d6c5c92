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

#include "qphot/config.hpp"

#include "qphot/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace qphot {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> splitList(const std::string& value) {
  std::vector<std::string> out;
  std::string_view rest = value;
  while (true) {
    const auto comma = rest.find(',');
    out.push_back(trim(rest.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

template <typename T>
T parseNumber(const std::string& text, const std::string& section, const std::string& key) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(where(section, key) + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

std::string scalarToString(const nlohmann::json& v, const std::string& section, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_float()) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, res.ptr);
  }
  throw ConfigError(where(section, key) + ": unsupported JSON value");
}

}  // namespace

Config Config::fromIniString(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  Config cfg;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      cfg.set("", name, trim(node.data()));
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty()) throw ConfigError("nested keys are not supported: " + where(name, key));
      cfg.set(name, key, trim(leaf.data()));
    }
  }
  return cfg;
}

Config Config::fromIniFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return fromIniString(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Config Config::fromJson(const nlohmann::json& json) {
  if (!json.is_object()) throw ConfigError("config JSON must be an object of sections");
  Config cfg;
  for (const auto& [section, body] : json.items()) {
    if (!body.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) {
      if (value.is_array()) {
        std::string joined;
        for (std::size_t i = 0; i < value.size(); ++i) {
          if (i) joined += ", ";
          joined += scalarToString(value[i], section, key);
        }
        cfg.set(section, key, joined);
      } else {
        cfg.set(section, key, scalarToString(value, section, key));
      }
    }
  }
  return cfg;
}

Config Config::fromFile(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    try {
      return fromJson(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return fromIniFile(path);
}

nlohmann::json Config::toJson() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [section, keys] : sections_) {
    nlohmann::json body = nlohmann::json::object();
    for (const auto& [key, value] : keys) body[key] = value;
    out[section] = std::move(body);
  }
  return out;
}

bool Config::has(const std::string& section, const std::string& key) const { return raw(section, key).has_value(); }

void Config::set(const std::string& section, const std::string& key, std::string value) {
  sections_[section][key] = std::move(value);
}

std::optional<std::string> Config::raw(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string Config::getString(const std::string& section, const std::string& key,
                              const std::string& fallback) const {
  return raw(section, key).value_or(fallback);
}

double Config::getDouble(const std::string& section, const std::string& key, double fallback) const {
  const auto v = raw(section, key);
  return v ? parseNumber<double>(*v, section, key) : fallback;
}

int Config::getInt(const std::string& section, const std::string& key, int fallback) const {
  const auto v = raw(section, key);
  return v ? parseNumber<int>(*v, section, key) : fallback;
}

std::uint64_t Config::getUint(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  const auto v = raw(section, key);
  return v ? parseNumber<std::uint64_t>(*v, section, key) : fallback;
}

bool Config::getBool(const std::string& section, const std::string& key, bool fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  std::string lower = *v;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "true" || lower == "1" || lower == "yes" || lower == "on") return true;
  if (lower == "false" || lower == "0" || lower == "no" || lower == "off") return false;
  throw ConfigError(where(section, key) + ": cannot parse '" + *v + "' as a boolean");
}

std::vector<double> Config::getDoubleList(const std::string& section, const std::string& key,
                                          const std::vector<double>& fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : splitList(*v)) out.push_back(parseNumber<double>(item, section, key));
  return out;
}

std::vector<int> Config::getIntList(const std::string& section, const std::string& key,
                                    const std::vector<int>& fallback) const {
  const auto v = raw(section, key);
  if (!v) return fallback;
  std::vector<int> out;
  for (const auto& item : splitList(*v)) out.push_back(parseNumber<int>(item, section, key));
  return out;
}

void Config::requireKnownKeys(const std::string& section, std::span<const std::string_view> allowed) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return;
  for (const auto& [key, value] : s->second) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown config key " + where(section, key));
    }
  }
}

void Config::requireKnownSections(std::span<const std::string_view> allowed) const {
  for (const auto& [section, keys] : sections_) {
    if (std::find(allowed.begin(), allowed.end(), section) == allowed.end()) {
      throw ConfigError("unknown config section [" + section + "]");
    }
  }
}

}  // namespace qphot
