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

// Projective (depth + optical flow) and linear observation models, their
// gradient operators and derivatives, and the EKF measurement Jacobians.

#include <vector>

#include "mefse3/lie.hpp"

namespace mefse3 {

// Points closer than this to the camera principal plane are rejected.
inline constexpr double kMinDepth = 1e-9;

// A pixel (normalized coordinates, unit focal length) with depth in the
// previous camera and its flow-displaced measurement in the current one.
struct Observation {
  Vec2 pixel = Vec2::Zero();
  double depth = 1.0;
  Vec2 y = Vec2::Zero();

  // (depth * pixel, depth, 1).
  Vec4 g() const;
};

struct LinearObservation {
  Vec4 a = Vec4::Zero();
  Vec4 y = Vec4::Zero();
};

// All measurements available during one frame interval, with their weights.
// Weights are inverse noise levels in the filter cost (Q in 1/2 |r|_Q^2).
struct Frame {
  std::vector<Observation> points;
  Mat2 point_weight = Mat2::Identity();
  std::vector<LinearObservation> linear;
  Mat4 linear_weight = Mat4::Identity();

  bool empty() const { return points.empty() && linear.empty(); }
};

// Depth of g seen from camera E: e_3^T E^{-1} g.
double kappa(const Pose& e, const Vec4& g);
// Projection of g into camera E; throws DegenerateDepth if |kappa| <= 1e-9.
Vec2 h_k(const Pose& e, const Vec4& g);

Vec2 residual_vec(const Observation& obs, const Pose& e);
// 1/2 |y - h|_Q^2.
double residual_cost(const Observation& obs, const Pose& e, const Mat2& q);

// Gradient operator: <pr_se(A_k), eta> is the derivative of the point cost
// along E exp(tau eta).
Mat4 A_k(const Pose& e, const Vec4& g, const Vec2& y, const Mat2& q);
// Derivative of h_k along the ambient direction E + tau xi.
Vec2 dh_k(const Pose& e, const Vec4& g, const Mat4& xi);
// vec_se(pr_se(d A_k[eta])) along the ambient direction E + tau eta.
Vec6 zeta_k(const Pose& e, const Vec4& g, const Vec2& y, const Mat2& q, const Mat4& eta);
// Column j is zeta_k(..., mat_se(e_j)).
Mat6 D_k(const Pose& e, const Vec4& g, const Vec2& y, const Mat2& q);

Mat4 A_k_linear(const Pose& e, const Vec4& a, const Vec4& y, const Mat4& q);
Vec6 zeta_linear(const Pose& e, const Vec4& a, const Vec4& y, const Mat4& q, const Mat4& eta);
Mat6 D_k_linear(const Pose& e, const Vec4& a, const Vec4& y, const Mat4& q);

// Cost of a whole frame (degenerate points are skipped).
double frame_cost(const Frame& frame, const Pose& e);

// Summed per-frame terms used by the filter.
struct FrameTerms {
  Mat4 gradient = Mat4::Zero();  // sum of pr_se(A_k)
  Mat6 hessian = Mat6::Zero();   // sum of gamma_tilde(vec pr_se A_k) + D_k
  int used = 0;
  int dropped = 0;  // degenerate points
};
FrameTerms frame_terms(const Frame& frame, const Pose& e, bool with_hessian = true);

// Jacobian of the summed point projections along left-translated directions,
// padded with zero velocity columns. Throws DegenerateDepth.
Eigen::Matrix<double, 2, 12> ekf_H_nonlinear(const Pose& e, const std::vector<Observation>& obs);
Eigen::Matrix<double, 4, 12> ekf_H_linear(const Pose& e, const std::vector<Vec4>& directions);

}  // namespace mefse3
