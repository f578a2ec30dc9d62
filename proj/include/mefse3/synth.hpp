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

// Synthetic ground truth: kinematic camera tracks, static point scenes,
// induced depth/flow observations, noise models and error metrics.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mefse3/lie.hpp"
#include "mefse3/observation.hpp"

namespace mefse3 {

using Rng = std::mt19937_64;

// Absolute camera poses sampled at frame times.
struct Track {
  std::vector<double> times;
  std::vector<Pose> poses;
  std::vector<VecX> velocities;  // derivative stack per frame, may be empty

  std::size_t size() const { return poses.size(); }
  // Pose of camera l relative to camera l-1 (l >= 1).
  Pose relative(std::size_t l) const { return poses[l - 1].inverse() * poses[l]; }
};

struct TrackSpec {
  // Number of kinematic derivatives carried; the last one is constant
  // (absent noise). 0 = static, 1 = constant velocity, 2 = constant acceleration.
  int order = 1;
  Pose start;
  std::vector<Vec6> derivatives;  // initial v_1..v_order
  int frames = 100;               // number of frame intervals; frames + 1 poses
  double frame_interval = 1.0;
  int substeps = 20;              // integration steps per frame interval
  // Optional diffusion covariance of the noise on (pose, v_1..v_order),
  // dimension 6(order+1); integrated with Euler-Maruyama increments.
  std::optional<MatX> process_noise;
};

// Throws InvalidArgument on inconsistent dimensions.
Track generate_track(const TrackSpec& spec, Rng* rng = nullptr);

struct Scene {
  std::vector<Vec3> points;
};

// Viewing volume in normalized image coordinates.
struct Frustum {
  double half_width = 0.7;   // |x1| bound
  double half_height = 0.5;  // |x2| bound
  double near = 4.0;
  double far = 40.0;
};

// `count` points uniform in pixel and depth inside the frustum of `camera`.
Scene frustum_scene(const Pose& camera, int count, const Frustum& frustum, Rng& rng);

// n distinct scene points visible from both cameras, with noiseless
// measurements y = h_k(E_prev^{-1} E_cur, g). Throws InvalidArgument if the
// scene has fewer than n usable points.
std::vector<Observation> observe_frame(const Pose& e_prev, const Pose& e_cur, const Scene& scene, int n, Rng& rng);

struct NoiseModel {
  enum class Kind { None, AdditiveGaussian, AdditiveUniform, MultiplicativeGaussian, MultiplicativeUniform };
  Kind kind = Kind::None;
  double mean = 0.0;
  double variance = 0.0;

  static NoiseModel parse(const std::string& name, double variance);  // "none", "AG", "AU", "MG", "MU"
  std::string name() const;
};

// Additive noise perturbs y; multiplicative noise scales each flow component
// y - pixel independently.
void apply_noise(std::vector<Observation>& obs, const NoiseModel& model, Rng& rng);

// Builds one observation frame per track interval, each from a fresh scene
// in the frustum of the earlier camera.
std::vector<Frame> simulate_frames(const Track& track, int n, const Frustum& frustum, const NoiseModel& noise,
                                   const Mat2& weight, Rng& rng);

double rotation_error_deg(const Pose& gt, const Pose& est);
double translation_error(const Pose& gt, const Pose& est);
// Per-frame geodesic distances; NaN where the logarithm is undefined.
std::vector<double> geodesic_error_series(const std::vector<Pose>& gt, const std::vector<Pose>& est);

}  // namespace mefse3
