// Copyright 2026 The mefse3 Authors
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

// CLI subcommands. Each writes its CSV to cfg.output ("-" for stdout).

#include <string>
#include <vector>

#include "config.hpp"

namespace mefse3::app {

inline constexpr const char* kResultsSchema = "# mefse3 results v1";

void cmd_simulate(const ExperimentConfig& cfg);
// Returns false when the filter failed; rows before the failure are written.
bool cmd_filter(const ExperimentConfig& cfg);
void cmd_sweep(const ExperimentConfig& cfg);
void cmd_compare_ekf(const ExperimentConfig& cfg);

// Full command line entry point; returns the process exit code
// (0 success, 1 runtime failure, 2 configuration error).
int run_cli(int argc, const char* const* argv);

}  // namespace mefse3::app
