// Copyright 2026 The credxfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "credxfer/log.h"

#include <atomic>
#include <chrono>
#include <ctime>
#include <iostream>
#include <mutex>

namespace credxfer {
namespace {

std::mutex& SinkMutex() {
  static auto* mu = new std::mutex;
  return *mu;
}

LogSink& Sink() {
  static auto* sink = new LogSink;
  return *sink;
}

std::atomic<LogLevel> min_level{LogLevel::kInfo};

char const* LevelName(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "DEBUG";
    case LogLevel::kInfo: return "INFO";
    case LogLevel::kWarning: return "WARN";
    case LogLevel::kError: return "ERROR";
  }
  return "INFO";
}

}  // namespace

void SetLogSink(LogSink sink) {
  std::lock_guard<std::mutex> lk(SinkMutex());
  Sink() = std::move(sink);
}

void SetMinLogLevel(LogLevel level) { min_level = level; }

void Log(LogLevel level, std::string_view message) {
  if (level < min_level.load()) return;
  std::lock_guard<std::mutex> lk(SinkMutex());
  if (Sink()) {
    Sink()(level, message);
    return;
  }
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm);
  std::cerr << stamp << " " << LevelName(level) << " " << message << "\n";
}

}  // namespace credxfer
