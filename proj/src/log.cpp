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

#include "qphot/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace qphot::log {
namespace {

std::atomic<Level> gLevel{Level::Warn};
std::mutex gMutex;
std::function<void(Level, std::string_view)> gSink;

const char* name(Level level) {
  switch (level) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    case Level::Off: break;
  }
  return "";
}

}  // namespace

void setLevel(Level level) { gLevel = level; }
Level level() { return gLevel; }

void setSink(std::function<void(Level, std::string_view)> sink) {
  std::lock_guard lock(gMutex);
  gSink = std::move(sink);
}

void write(Level lvl, std::string_view message) {
  if (lvl < gLevel.load() || lvl == Level::Off) return;
  std::lock_guard lock(gMutex);
  if (gSink) {
    gSink(lvl, message);
    return;
  }
  std::cerr << "[" << name(lvl) << "] " << message << '\n';
}

}  // namespace qphot::log
