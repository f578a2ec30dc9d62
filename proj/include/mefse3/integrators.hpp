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

// Geometric integrators: implicit Lie midpoint for group states, implicit
// Euler for matrix Riccati equations, and a classical RK4 step.

#include <functional>

#include "mefse3/lie.hpp"

namespace mefse3 {

// Right-hand side of G^{-1} dG/dt = rhs(G), returned in vec_g coordinates.
using GroupRhs = std::function<VecX(const GroupElement&)>;

struct MidpointOptions {
  double tol = 1e-12;
  int max_iter = 100;
};

struct MidpointResult {
  GroupElement g;
  VecX increment;  // Xi, with G_next = G Exp(Xi)
  int iterations = 0;
  bool used_newton = false;
};

// G_next = G Exp(Xi) with Xi = delta * rhs(G Exp(Xi / 2)), solved by fixed-point
// iteration from Xi = delta * rhs(G). If the iteration stops contracting
// (stiff steps), restarts with Newton using a finite-difference Jacobian.
// Throws FixedPointDiverged.
MidpointResult lie_midpoint_step(const GroupElement& g, const GroupRhs& rhs, double delta,
                                 const MidpointOptions& opts = {});

// dP/dt = A P + P A^T - P B P + C.
struct RiccatiCoefficients {
  MatX A;
  MatX B;
  MatX C;
};

struct RiccatiStepInfo {
  int newton_iterations = 0;
  bool used_fallback = false;
  double residual = 0.0;
};

// Solves M X + X M^T = F (complex Schur form of M, Bartels-Stewart
// back-substitution). The factorization is reused across right-hand sides.
class LyapunovSolver {
 public:
  explicit LyapunovSolver(const MatX& m);
  MatX solve(const MatX& f) const;

 private:
  Eigen::MatrixXcd t_;
  Eigen::MatrixXcd u_;
};

MatX solve_lyapunov(const MatX& m, const MatX& f);

// One implicit Euler step: P_next = P + delta (A P_next + P_next A^T - P_next B P_next + C),
// solved as an algebraic Riccati equation started from P. Iterations first
// reuse the Newton-Kleinman Lyapunov operator at P (chord steps) and switch
// to full Newton-Kleinman if those stall. Falls back once to an explicit
// quarter step followed by a retry. Throws RiccatiSolveFailed.
MatX riccati_implicit_euler_step(const MatX& p, const RiccatiCoefficients& c, double delta,
                                 RiccatiStepInfo* info = nullptr);

MatX riccati_rhs_value(const MatX& p, const RiccatiCoefficients& c);

// Classical Runge-Kutta step for x' = rhs(x) on any vector-space type.
template <class T, class F>
T rk4_step(const T& x, F&& rhs, double delta) {
  const T k1 = rhs(x);
  const T k2 = rhs(T(x + 0.5 * delta * k1));
  const T k3 = rhs(T(x + 0.5 * delta * k2));
  const T k4 = rhs(T(x + delta * k3));
  return T(x + (delta / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

}  // namespace mefse3
