// tools/cli.h

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

#ifndef XVALIGN_TOOLS_CLI_H_
#define XVALIGN_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace xvalign::cli {

/**
   Runs one xvalign command.  `args` excludes the program name, e.g.
   {"train", "--config", "toy.ini"}.  Returns the process exit status:
   0 on success, 1 when a check fails (gradcheck), 2 on usage,
   configuration or missing-stage errors.
*/
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace xvalign::cli

#endif  // XVALIGN_TOOLS_CLI_H_
