// Copyright 2026 The dflute Authors
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

#include <ostream>
#include <string>
#include <vector>

namespace dflute::cli {

/// Exit statuses shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPartial = 2;

/// Environment variables consulted when no endpoint flag is given.
inline constexpr const char* kDreamUrlEnv = "FLUTE_DREAM_URL";
inline constexpr const char* kModelUrlEnv = "FLUTE_MODEL_URL";
inline constexpr const char* kScorerUrlEnv = "FLUTE_SCORER_URL";

/// Parses `args` (without the program name) and runs one subcommand:
/// split, elaborate, predict, ensemble, evaluate or export.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace dflute::cli
