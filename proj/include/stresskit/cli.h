/*
 * Copyright 2026 The Stresskit Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef STRESSKIT_CLI_H_
#define STRESSKIT_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace stresskit {

// Exit codes of RunCli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the `stresskit` tool. `args` excludes the program name.
// Every subcommand writes into the run directory given by --out: its
// outputs, config.toml (effective options) and run.log. Failures also
// leave error.json there when the directory could be created.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace stresskit

#endif  // STRESSKIT_CLI_H_
