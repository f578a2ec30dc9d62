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

// Experiment drivers shared by the CLI commands and the acceptance checks.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "mefse3/ekf.hpp"
#include "mefse3/mef.hpp"
#include "mefse3/synth.hpp"

namespace mefse3::app {

// Initial derivatives v_1..v_order of the benchmark track family: a fixed
// forward-moving velocity plus polynomial terms whose effect over the whole
// track is `amplitude` times a fixed direction. Orders above 4 repeat the
// 4th-order direction.
std::vector<Vec6> track_derivatives(int order, int frames, double frame_interval, double amplitude,
                                    double v0_scale);

// Ground-truth track from the config: the pose file if set, else generated.
Track make_track(const ExperimentConfig& cfg);
Track make_track(const ExperimentConfig& cfg, int track_order);

std::vector<Frame> make_frames(const Track& track, const ExperimentConfig& cfg, int n, const NoiseModel& noise,
                               std::uint64_t seed);

struct FilterRun {
  std::vector<FilterState> states;  // states[0] is the initial state
  bool ok = true;
  int failed_frame = 0;
  std::string failure;
};

// Like run_filter, but keeps the states computed before a failure.
FilterRun run_mef(const FilterState& initial, const std::vector<Frame>& frames, const FilterConfig& cfg);

struct ErrorSummary {
  double geodesic = 0.0;
  double rotation_deg = 0.0;
  double translation = 0.0;
  int frames = 0;
};

// Mean errors of estimated relative motions est[1..] against the track.
ErrorSummary mean_errors(const Track& track, const std::vector<FilterState>& est);

struct CellSpec {
  int order = 1;
  NoiseModel noise;
  int n = 50;
  double alpha = 2.0;
};

struct CellResult {
  CellSpec spec;
  int repeats = 0;
  int ok_repeats = 0;
  ErrorSummary mean;  // over frames and successful repeats
  std::vector<double> repeat_means;  // geodesic, one per successful repeat
  std::string status;  // "ok" or the failure reasons
};

// Repeat r uses seed cfg.seed + r.
CellResult run_cell(const ExperimentConfig& cfg, const Track& track, const CellSpec& spec);

std::vector<CellSpec> sweep_cells(const ExperimentConfig& cfg);

// Cells run on a thread pool; results come back in grid order.
std::vector<CellResult> run_sweep(const ExperimentConfig& cfg, const Track& track);

struct CompareRow {
  double t = 0.0;
  Vec6 gt;
  std::optional<Vec6> mef;
  std::optional<Vec6> ekf;
  double mef_error = std::numeric_limits<double>::quiet_NaN();
  double ekf_error = std::numeric_limits<double>::quiet_NaN();
};

struct CompareResult {
  std::vector<CompareRow> rows;  // rows[l] belongs to frame l, row 0 is the start
  std::string mef_failure;
  std::string ekf_failure;
};

CompareResult run_compare(const ExperimentConfig& cfg);

}  // namespace mefse3::app
