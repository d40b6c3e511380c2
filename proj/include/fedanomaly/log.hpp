/*
 * Copyright 2026 The fedanomaly Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <string>

namespace fedanomaly {

// Library-wide stderr logger. Verbosity comes from FEDANOMALY_LOG
// (trace|debug|info|warn|error|off), default warn.
inline spdlog::logger& Log() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto l = std::make_shared<spdlog::logger>("fedanomaly", sink);
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("FEDANOMALY_LOG");
    l->set_level(env != nullptr ? spdlog::level::from_str(env)
                                : spdlog::level::warn);
    return l;
  }();
  return *logger;
}

}  // namespace fedanomaly
