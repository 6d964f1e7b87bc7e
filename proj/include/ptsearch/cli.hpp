// Copyright 2026 The ptsearch Authors.
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

#ifndef PTSEARCH_CLI_HPP_
#define PTSEARCH_CLI_HPP_

#include <ostream>
#include <span>
#include <string>

namespace ptsearch {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInvalidArgs = 2,
  kExitLoadError = 3,
  kExitDiverged = 4,
};

// Runs one command line (without the program name). Human-readable output
// goes to `out`, diagnostics to `err`.
int run_command(std::span<const std::string> args, std::ostream& out,
                std::ostream& err);

}  // namespace ptsearch

#endif  // PTSEARCH_CLI_HPP_
