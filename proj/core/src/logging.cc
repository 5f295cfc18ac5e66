// logging.cc

// Copyright 2026 The xvalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "xvalign/logging.h"

#include <atomic>
#include <iostream>
#include <mutex>

namespace xvalign {

namespace {
std::atomic<int> g_level{static_cast<int>(LogLevel::kWarning)};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_mutex;
}  // namespace

void SetLogLevel(LogLevel level) { g_level = static_cast<int>(level); }
LogLevel GetLogLevel() { return static_cast<LogLevel>(g_level.load()); }

void LogWarning(const std::string& msg) {
  ++g_warnings;
  if (g_level < static_cast<int>(LogLevel::kWarning)) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "WARNING (xvalign) " << msg << '\n';
}

void LogInfo(const std::string& msg) {
  if (g_level < static_cast<int>(LogLevel::kInfo)) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "LOG (xvalign) " << msg << '\n';
}

std::size_t WarningCount() { return g_warnings.load(); }

}  // namespace xvalign
