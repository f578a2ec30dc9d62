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

#include "mefse3/integrators.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>

#include "mefse3/errors.hpp"

namespace mefse3 {
namespace {

MatX symmetrize(const MatX& m) { return 0.5 * (m + m.transpose()); }

struct NewtonResult {
  bool ok = false;
  MatX x;
  int iterations = 0;
  double residual = 0.0;
};

// Solves  At X + X At^T - X Bt X + Ct = 0  from x0.
bool stabilizing(const MatX& at, const MatX& bt, const MatX& x) {
  const Eigen::EigenSolver<MatX> eig(at - x * bt, false);
  return eig.info() == Eigen::Success && eig.eigenvalues().real().maxCoeff() < 0.0;
}

// Stabilizing solution of at X + X at^T - X bt X + ct = 0 from the matrix sign
// of the Hamiltonian, with determinant scaling.
std::optional<MatX> are_sign_guess(const MatX& at, const MatX& bt, const MatX& ct) {
  const Eigen::Index n = at.rows();
  MatX z(2 * n, 2 * n);
  z << at.transpose(), -bt, -ct, -at;
  for (int it = 0; it < 100; ++it) {
    const Eigen::PartialPivLU<MatX> lu(z);
    const double det = std::abs(lu.determinant());
    if (!(det > 0.0) || !std::isfinite(det)) return std::nullopt;
    const double c = std::pow(det, -1.0 / static_cast<double>(2 * n));
    const MatX next = 0.5 * (c * z + lu.inverse() / c);
    const double change = (next - z).norm();
    z = next;
    if (!z.allFinite()) return std::nullopt;
    if (change <= 1e-12 * z.norm()) break;
  }
  const MatX id = MatX::Identity(n, n);
  MatX lhs(2 * n, n), rhs(2 * n, n);
  lhs << z.topRightCorner(n, n), z.bottomRightCorner(n, n) + id;
  rhs << z.topLeftCorner(n, n) + id, z.bottomLeftCorner(n, n);
  const MatX x = symmetrize(lhs.colPivHouseholderQr().solve(-rhs));
  if (!x.allFinite()) return std::nullopt;
  return x;
}

NewtonResult newton_are(const MatX& at, const MatX& bt, const MatX& ct, const MatX& x0) {
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 50;
  constexpr int kChordIter = 20;
  auto residual = [&](const MatX& x, MatX* r) {
    const MatX ax = at * x;
    const MatX xbx = x * bt * x;
    *r = ax + ax.transpose() - xbx + ct;
    return r->norm() / std::max(1.0, ct.norm() + 2.0 * ax.norm() + xbx.norm());
  };
  NewtonResult res;
  MatX x = x0;
  MatX r;
  const LyapunovSolver chord(at - x0 * bt);
  bool newton = false;
  double last = std::numeric_limits<double>::infinity();
  for (int it = 0; it <= kMaxIter; ++it) {
    res.residual = residual(x, &r);
    res.iterations = it;
    if (!std::isfinite(res.residual)) return res;
    if (res.residual <= kTol) {
      // One Newton correction from here lands at rounding level.
      MatX r2;
      const MatX x2 = symmetrize(x + LyapunovSolver(at - x * bt).solve(-r));
      const double res2 = residual(x2, &r2);
      if (res2 < res.residual) {
        x = x2;
        res.residual = res2;
      }
      res.x = x;
      res.ok = Eigen::LLT<MatX>(x).info() == Eigen::Success;
      return res;
    }
    if (it == kMaxIter) break;
    if (!newton && (it >= kChordIter || res.residual > 0.5 * last)) newton = true;
    last = res.residual;
    x = symmetrize(x + (newton ? LyapunovSolver(at - x * bt).solve(-r) : chord.solve(-r)));
  }
  return res;
}

// Newton from the caller's guess, which is usually the previous P. When that
// lands on a non-stabilizing root, restart from the sign-function solution.
NewtonResult solve_are(const MatX& at, const MatX& bt, const MatX& ct, const MatX& x0) {
  NewtonResult r = newton_are(at, bt, ct, x0);
  if (r.ok && stabilizing(at, bt, r.x)) return r;
  const auto guess = are_sign_guess(at, bt, ct);
  if (!guess) return r;
  NewtonResult s = newton_are(at, bt, ct, *guess);
  s.iterations += r.iterations;
  if (s.ok && stabilizing(at, bt, s.x)) return s;
  return r.ok ? r : s;
}

}  // namespace

namespace {

// Newton on F(Xi) = Xi - delta * rhs(G Exp(Xi / 2)) with a central-difference
// Jacobian and step halving. Used when plain iteration stops contracting.
bool midpoint_newton(const GroupElement& g, const GroupRhs& rhs, double delta, const MidpointOptions& opts,
                     VecX& xi, int& iterations) {
  auto residual = [&](const VecX& x) -> VecX { return x - delta * rhs(g * exp_g(0.5 * x)); };
  const Eigen::Index n = xi.size();
  VecX f = residual(xi);
  for (int it = 1; it <= opts.max_iter; ++it) {
    ++iterations;
    MatX jac(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(xi(j)));
      VecX xp = xi, xm = xi;
      xp(j) += h;
      xm(j) -= h;
      jac.col(j) = (residual(xp) - residual(xm)) / (2.0 * h);
    }
    const VecX step = jac.partialPivLu().solve(-f);
    if (!step.allFinite()) return false;
    double lambda = 1.0;
    VecX trial = xi + step;
    VecX ft = residual(trial);
    while (!(ft.norm() < f.norm()) && lambda > 1e-4) {
      lambda *= 0.5;
      trial = xi + lambda * step;
      ft = residual(trial);
    }
    const double change = (trial - xi).norm();
    xi = trial;
    f = ft;
    if (!xi.allFinite()) return false;
    if (change <= opts.tol * std::max(1.0, xi.norm()) || f.norm() <= 0.1 * opts.tol * std::max(1.0, xi.norm())) {
      return true;
    }
  }
  return false;
}

}  // namespace

MidpointResult lie_midpoint_step(const GroupElement& g, const GroupRhs& rhs, double delta,
                                 const MidpointOptions& opts) {
  MidpointResult out;
  const VecX xi0 = delta * rhs(g);
  VecX xi = xi0;
  double last_change = std::numeric_limits<double>::infinity();
  int stalls = 0;
  int fixed_iterations = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    const VecX next = delta * rhs(g * exp_g(0.5 * xi));
    const double change = (next - xi).norm();
    fixed_iterations = it;
    if (!std::isfinite(change)) break;
    xi = next;
    if (change <= opts.tol * std::max(1.0, xi.norm())) {
      out.g = g * exp_g(xi);
      out.increment = xi;
      out.iterations = it;
      return out;
    }
    // Not contracting: the step is too stiff for plain iteration.
    stalls = change > 0.9 * last_change ? stalls + 1 : 0;
    if (stalls >= 2) break;
    last_change = change;
  }
  int iterations = 0;
  xi = xi0;
  if (!midpoint_newton(g, rhs, delta, opts, xi, iterations)) {
    throw FixedPointDiverged("midpoint equation did not converge (Newton fallback failed after " +
                             std::to_string(iterations) + " iterations)");
  }
  out.g = g * exp_g(xi);
  out.increment = xi;
  out.iterations = fixed_iterations + iterations;
  out.used_newton = true;
  return out;
}

LyapunovSolver::LyapunovSolver(const MatX& m) {
  Eigen::ComplexSchur<MatX> schur(m);
  t_ = schur.matrixT();
  u_ = schur.matrixU();
}

MatX LyapunovSolver::solve(const MatX& f) const {
  using CMat = Eigen::MatrixXcd;
  const Eigen::Index n = t_.rows();
  const CMat g = u_.adjoint() * f.cast<std::complex<double>>() * u_;
  // T Y + Y T^H = G, one column at a time from the right.
  CMat y = CMat::Zero(n, n);
  CMat tj = t_;
  for (Eigen::Index j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = g.col(j);
    for (Eigen::Index k = j + 1; k < n; ++k) rhs -= std::conj(t_(j, k)) * y.col(k);
    tj.diagonal() = t_.diagonal().array() + std::conj(t_(j, j));
    y.col(j) = tj.triangularView<Eigen::Upper>().solve(rhs);
  }
  return (u_ * y * u_.adjoint()).real();
}

MatX solve_lyapunov(const MatX& m, const MatX& f) { return LyapunovSolver(m).solve(f); }

MatX riccati_rhs_value(const MatX& p, const RiccatiCoefficients& c) {
  const MatX ap = c.A * p;
  return ap + ap.transpose() - p * c.B * p + c.C;
}

MatX riccati_implicit_euler_step(const MatX& p, const RiccatiCoefficients& c, double delta, RiccatiStepInfo* info) {
  const Eigen::Index n = p.rows();
  const MatX b = symmetrize(c.B);
  const MatX cc = symmetrize(c.C);
  auto attempt = [&](const MatX& p0, double h) {
    const MatX at = h * c.A - 0.5 * MatX::Identity(n, n);
    return solve_are(at, h * b, symmetrize(p0 + h * cc), p0);
  };
  NewtonResult r = attempt(p, delta);
  bool fallback = false;
  if (!r.ok) {
    fallback = true;
    const double h = 0.25 * delta;
    const MatX p_quarter = symmetrize(p + h * riccati_rhs_value(p, RiccatiCoefficients{c.A, b, cc}));
    r = attempt(p_quarter, delta - h);
    if (!r.ok) {
      throw RiccatiSolveFailed("implicit Riccati step failed (relative residual " + std::to_string(r.residual) +
                               " after " + std::to_string(r.iterations) + " Newton iterations)");
    }
  }
  if (info) {
    info->newton_iterations = r.iterations;
    info->used_fallback = fallback;
    info->residual = r.residual;
  }
  return symmetrize(r.x);
}

}  // namespace mefse3
