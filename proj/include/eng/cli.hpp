// Copyright 2026 The ENG Authors.
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

#ifndef ENG_CLI_HPP_
#define ENG_CLI_HPP_

#include <ostream>

namespace eng {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

// Entry point of the `eng` tool. Subcommands: build-graph, pretrain, train,
// eval, infer, analyze, export-fixtures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eng

#endif  // ENG_CLI_HPP_
