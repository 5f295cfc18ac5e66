// xvalign/logging.h

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

#ifndef XVALIGN_LOGGING_H_
#define XVALIGN_LOGGING_H_

#include <cstddef>
#include <string>

namespace xvalign {

enum class LogLevel { kQuiet = 0, kWarning = 1, kInfo = 2 };

void SetLogLevel(LogLevel level);
LogLevel GetLogLevel();

/// Messages go to stderr, prefixed with their level.
void LogWarning(const std::string& msg);
void LogInfo(const std::string& msg);

/// Number of warnings emitted since start-up (used by tests).
std::size_t WarningCount();

}  // namespace xvalign

#endif  // XVALIGN_LOGGING_H_
