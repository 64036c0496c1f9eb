// Copyright 2026 The SciSumm Authors. All Rights Reserved.
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

#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>

namespace scisumm {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3 };

inline const char* log_level_name(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug: return "DEBUG";
    case LogLevel::kInfo: return "INFO";
    case LogLevel::kWarning: return "WARN";
    case LogLevel::kError: return "ERROR";
  }
  return "?";
}

// Process-wide sink. Tests swap it out to capture warnings.
class Logger {
 public:
  using Sink = std::function<void(LogLevel, const std::string&)>;

  static Logger& instance() {
    static Logger logger;
    return logger;
  }

  void set_min_level(LogLevel level) {
    std::lock_guard<std::mutex> lock(mu_);
    min_level_ = level;
  }

  // Returns the previous sink so callers can restore it.
  Sink set_sink(Sink sink) {
    std::lock_guard<std::mutex> lock(mu_);
    return std::exchange(sink_, std::move(sink));
  }

  void write(LogLevel level, const std::string& msg) {
    std::lock_guard<std::mutex> lock(mu_);
    if (level < min_level_) return;
    if (sink_) {
      sink_(level, msg);
    } else {
      std::cerr << "[" << log_level_name(level) << "] " << msg << '\n';
    }
  }

 private:
  Logger() = default;
  std::mutex mu_;
  LogLevel min_level_ = LogLevel::kInfo;
  Sink sink_;
};

template <typename... Args>
void log(LogLevel level, Args&&... args) {
  std::ostringstream oss;
  (oss << ... << std::forward<Args>(args));
  Logger::instance().write(level, oss.str());
}

template <typename... Args>
void log_warning(Args&&... args) {
  log(LogLevel::kWarning, std::forward<Args>(args)...);
}

template <typename... Args>
void log_info(Args&&... args) {
  log(LogLevel::kInfo, std::forward<Args>(args)...);
}

// RAII capture of everything logged while alive.
class ScopedLogCapture {
 public:
  ScopedLogCapture() {
    previous_ = Logger::instance().set_sink(
        [this](LogLevel level, const std::string& msg) {
          if (level >= LogLevel::kWarning) ++warnings_;
          text_ += msg;
          text_ += '\n';
        });
  }
  ~ScopedLogCapture() { Logger::instance().set_sink(std::move(previous_)); }
  ScopedLogCapture(const ScopedLogCapture&) = delete;
  ScopedLogCapture& operator=(const ScopedLogCapture&) = delete;

  int warnings() const { return warnings_; }
  const std::string& text() const { return text_; }

 private:
  Logger::Sink previous_;
  int warnings_ = 0;
  std::string text_;
};

}  // namespace scisumm
