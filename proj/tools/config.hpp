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

// Experiment configuration: a key = value text file, overridable per key
// from the command line.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mefse3/ekf.hpp"
#include "mefse3/mef.hpp"
#include "mefse3/synth.hpp"

namespace mefse3::app {

struct ExperimentConfig {
  // Filter.
  int order = 2;
  double alpha = 2.0;
  double delta = 1.0 / 50.0;
  double s1 = 1e-2;
  double s2 = 1e-5;
  double s_velocity_scale = 1.0;  // multiplies S_2..S_m
  int steps_per_frame = 1;
  bool psd_hessian = false;
  double q_scale = 0.1;  // Q = q_scale / n_obs * I
  int n_obs = 50;

  // Track: generated unless track_file is set.
  std::string track_file;
  int track_order = 2;
  int frames = 100;
  double frame_interval = 1.0;
  double amplitude = 1.0;
  double v0_scale = 1.0;

  // Observations and noise.
  std::string observations;  // input file for `filter`
  std::string noise = "none";
  double noise_var = 0.0;
  std::uint64_t seed = 1;

  // Outputs.
  std::string output = "results.csv";
  std::string track_out = "track.txt";
  std::string obs_out = "observations.csv";

  // Sweep grid, comma-separated lists.
  std::vector<int> sweep_orders{1, 2, 3, 4};
  std::vector<std::string> sweep_noise{"none"};
  std::vector<double> sweep_variances{0.0};
  std::vector<int> sweep_n{};      // empty: n_obs
  std::vector<double> sweep_alpha{};  // empty: alpha
  int repeats = 1;
  int threads = 0;  // 0: hardware concurrency

  // MEF vs EKF comparison.
  std::string compare_observations = "linear";  // linear | projective
  int compare_frames = 60;
  double compare_interval = 0.1;
  int compare_substeps = 10;     // ground-truth and MEF steps per interval
  double gt_noise = 1.0;         // diffusion of the ground-truth track
  double mef_obs_weight = 100.0;
  double mef_s = 1.0;
  double ekf_s = 1.0;
  double ekf_obs_var = 1e-8;
  std::string mef_init = "identity";  // identity | truth
  std::string ekf_init = "identity";
  bool compare_psd_hessian = true;

  // Derived settings.
  FilterConfig filter_config(int order_override = 0) const;
  Mat2 point_weight() const;
  NoiseModel noise_model() const;

  void validate() const;
};

struct ConfigKey {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

// One entry per configuration key.
const std::map<std::string, ConfigKey>& config_keys();

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void read_config(std::istream& in, ExperimentConfig& cfg);
void load_config_file(const std::string& path, ExperimentConfig& cfg);

// Canonical key = value dump, in key order.
std::string dump_config(const ExperimentConfig& cfg);

}  // namespace mefse3::app
