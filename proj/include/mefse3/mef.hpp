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

// Second-order minimum energy filter on SE(3) x R^{6(m-1)} with a kinematic
// model of order m: optimal-state ODE, Riccati ODE and their discretization.

#include <vector>

#include "mefse3/integrators.hpp"
#include "mefse3/lie.hpp"
#include "mefse3/observation.hpp"

namespace mefse3 {

struct FilterConfig {
  int order = 2;
  double alpha = 2.0;
  // Diagonals of the model-noise weights S_1..S_m; S = blockdiag(S_1, ..., S_m).
  std::vector<Vec6> s_blocks;
  double delta = 1.0 / 50.0;
  // Integration steps taken per frame; every step uses that frame's data.
  int steps_per_frame = 1;
  // Clip negative curvature of the observation Hessian before it enters the
  // Riccati equation. Off by default; far from the data an indefinite Hessian
  // can make P blow up in finite time when observations are weighted heavily.
  bool psd_hessian = false;
  MidpointOptions midpoint;

  // Every block equal to diag(s1, s1, s1, s2, s2, s2).
  static FilterConfig uniform(int order, double alpha, double s1, double s2, double delta);
  // alpha = 2, delta = 1/50, s1 = 1e-2, s2 = 1e-5.
  static FilterConfig defaults(int order);

  void validate() const;
  MatX s_inverse() const;
  int dim() const { return 6 * order; }
};

struct FilterState {
  GroupElement g;
  MatX p;
  double t = 0.0;

  // G = Id, P = I.
  static FilterState initial(int order, double t0 = 0.0);
};

// (mat_se v_1, v_2, ..., v_{m-1}, 0) in vec_g coordinates; zero for m = 1.
VecX f_kinematic(const GroupElement& g);
// (vec_se sum_k pr_se A_k(E), 0).
VecX r_t(const GroupElement& g, const Frame& frame);
// ad_se_vec(f_1) + gamma_tilde_star(c), where c = -(P r)_{1:6} is the
// observation-driven part of G^{-1} dG/dt.
Mat6 psi(const GroupElement& g, const MatX& p, const VecX& r);
// -Psi in the top-left block and identity blocks on the block superdiagonal.
MatX c_matrix(const GroupElement& g, const MatX& p, const VecX& r);
// Block superdiagonal identity of size 6m (the derivative of f_kinematic).
MatX shift_matrix(int order);
// sum_k (gamma_tilde(vec pr_se A_k) + D_k) in the top-left block, zero elsewhere.
MatX hessian_block(const Pose& e, const Frame& frame, int order);

// Riccati ODE in the form A P + P A^T - P B P + C with A = C_matrix - alpha/2,
// B the symmetric part of the Hessian block, C = S^{-1}.
RiccatiCoefficients riccati_coefficients(const FilterState& s, const Frame& frame, const FilterConfig& cfg);
MatX riccati_rhs(const FilterState& s, const Frame& frame, const FilterConfig& cfg);
// G^{-1} dG/dt = f(G) - mat_g(P vec_g r_t(G)), in vec_g coordinates.
VecX state_rhs(const FilterState& s, const Frame& frame, const FilterConfig& cfg);

struct StepInfo {
  int midpoint_iterations = 0;
  int newton_iterations = 0;
  bool riccati_fallback = false;
  int dropped_points = 0;
};

// Advances (G, P) by delta: Lie midpoint for G with P frozen, implicit Euler
// for P with coefficients frozen at the step start.
FilterState mef_step(const FilterState& s, const Frame& frame, const FilterConfig& cfg, StepInfo* info = nullptr);

// One state per frame boundary: result[0] is `initial`, result[l] the state
// after processing frames[l-1]. Step failures become FilterFailure.
std::vector<FilterState> run_filter(const FilterState& initial, const std::vector<Frame>& frames,
                                    const FilterConfig& cfg);

}  // namespace mefse3
