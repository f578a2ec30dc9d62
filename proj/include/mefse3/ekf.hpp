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

// Continuous-discrete extended Kalman filter on SE(3) x R^6 (second-order
// kinematics), the baseline against which the minimum energy filter is compared.

#include <utility>
#include <vector>

#include "mefse3/lie.hpp"
#include "mefse3/observation.hpp"

namespace mefse3 {

struct EkfConfig {
  Mat12 S = Mat12::Identity();  // process noise covariance
  Mat2 point_cov = Mat2::Identity();
  Mat4 linear_cov = Mat4::Identity();
  double delta = 1.0 / 50.0;     // inner propagation step
  double frame_interval = 1.0;   // time between updates
};

struct EkfState {
  GroupElement g = GroupElement::identity(2);
  Mat12 p = Mat12::Identity();
  double t = 0.0;
};

// F - ad_g(f(G)) + C(S)/12. Throws InvalidArgument for non-diagonal S.
Mat12 ekf_J(const GroupElement& g, const Mat12& s);

// {E[ad(e) S ad(e)^T], E[ad(e)^2]} for e ~ N(0, S), in closed form.
std::pair<Mat12, Mat12> expectation_terms(const Mat12& s);

// blockdiag(sum_n (-1)^n/(n+1)! ad(v_{1:6})^n, I_6).
Mat12 phi_jacobian(const Vec12& v);

// Covariance derivative of the propagation step at (G, P).
Mat12 ekf_covariance_rhs(const GroupElement& g, const Mat12& p, const Mat12& s);

EkfState ekf_propagate(const EkfState& state, double dt, const EkfConfig& cfg);
// Uses the frame's projective points, or its linear observations if there are
// no points. Throws SingularInnovation.
EkfState ekf_update(const EkfState& state, const Frame& frame, const EkfConfig& cfg);

// Propagate by frame_interval then update, once per frame; result[0] = initial.
std::vector<EkfState> ekf_run(const EkfState& initial, const std::vector<Frame>& frames, const EkfConfig& cfg);

}  // namespace mefse3
