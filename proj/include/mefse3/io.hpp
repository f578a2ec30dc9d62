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

// Text formats: pose files (one row-major 3x4 [R|w] per line) and
// observation batches (CSV or JSON lines).

#include <iosfwd>
#include <string>
#include <vector>

#include "mefse3/observation.hpp"
#include "mefse3/synth.hpp"

namespace mefse3 {

inline constexpr const char* kObservationSchema = "# mefse3 observations v1";

// Rotations off SO(3) are projected back (polar decomposition); a warning is
// logged when the deviation exceeds 1e-3. Throws ParseError with line number.
Track read_poses(std::istream& in, double frame_interval = 1.0);
Track load_pose_file(const std::string& path, double frame_interval = 1.0);
void write_poses(std::ostream& out, const std::vector<Pose>& poses);
void save_pose_file(const std::vector<Pose>& poses, const std::string& path);

// Frame indices are 1-based: frame l holds the measurements between poses
// l-1 and l. Empty frames are written as nothing and read back as empty.
void write_observations_csv(std::ostream& out, const std::vector<Frame>& frames);
std::vector<Frame> read_observations_csv(std::istream& in);
void write_observations_jsonl(std::ostream& out, const std::vector<Frame>& frames);
std::vector<Frame> read_observations_jsonl(std::istream& in);

// Dispatches on the extension (.jsonl or CSV otherwise).
void save_observations(const std::vector<Frame>& frames, const std::string& path);
std::vector<Frame> load_observations(const std::string& path);

}  // namespace mefse3
