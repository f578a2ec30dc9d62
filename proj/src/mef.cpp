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

#include "mefse3/mef.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Eigenvalues>
#include <string>

#include "mefse3/errors.hpp"

namespace mefse3 {

FilterConfig FilterConfig::uniform(int order, double alpha, double s1, double s2, double delta) {
  FilterConfig c;
  c.order = order;
  c.alpha = alpha;
  c.delta = delta;
  Vec6 d;
  d << s1, s1, s1, s2, s2, s2;
  c.s_blocks.assign(order, d);
  return c;
}

FilterConfig FilterConfig::defaults(int order) { return uniform(order, 2.0, 1e-2, 1e-5, 1.0 / 50.0); }

void FilterConfig::validate() const {
  if (order < 1 || order > kMaxOrder) throw ConfigError("order must be in [1, " + std::to_string(kMaxOrder) + "]");
  if (static_cast<int>(s_blocks.size()) != order) throw ConfigError("need one weight block per kinematic order");
  for (const auto& b : s_blocks) {
    if (!(b.minCoeff() > 0.0)) throw ConfigError("weight blocks must be positive definite");
  }
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (steps_per_frame < 1) throw ConfigError("steps_per_frame must be at least 1");
}

MatX FilterConfig::s_inverse() const {
  MatX s = MatX::Zero(dim(), dim());
  for (int i = 0; i < order; ++i) s.block<6, 6>(6 * i, 6 * i) = s_blocks[i].cwiseInverse().asDiagonal();
  return s;
}

FilterState FilterState::initial(int order, double t0) {
  return FilterState{GroupElement::identity(order), MatX::Identity(6 * order, 6 * order), t0};
}

VecX f_kinematic(const GroupElement& g) {
  const int m = g.order();
  VecX f = VecX::Zero(6 * m);
  // Slot i receives v_{i+1}; the last slot stays zero.
  if (m > 1) f.head(6 * (m - 1)) = g.velocities;
  return f;
}

VecX r_t(const GroupElement& g, const Frame& frame) {
  VecX r = VecX::Zero(6 * g.order());
  r.head<6>() = vec_se(frame_terms(frame, g.pose, false).gradient);
  return r;
}

Mat6 psi(const GroupElement& g, const MatX& p, const VecX& r) {
  const VecX f = f_kinematic(g);
  const Vec6 correction = -(p * r).head<6>();
  return ad_se_vec(f.head<6>()) + gamma_tilde_star6(correction);
}

MatX shift_matrix(int order) {
  MatX s = MatX::Zero(6 * order, 6 * order);
  for (int i = 0; i + 1 < order; ++i) s.block<6, 6>(6 * i, 6 * (i + 1)).setIdentity();
  return s;
}

MatX c_matrix(const GroupElement& g, const MatX& p, const VecX& r) {
  MatX c = shift_matrix(g.order());
  c.topLeftCorner<6, 6>() = -psi(g, p, r);
  return c;
}

MatX hessian_block(const Pose& e, const Frame& frame, int order) {
  MatX h = MatX::Zero(6 * order, 6 * order);
  h.topLeftCorner<6, 6>() = frame_terms(frame, e, true).hessian;
  return h;
}

RiccatiCoefficients riccati_coefficients(const FilterState& s, const Frame& frame, const FilterConfig& cfg) {
  const int n = cfg.dim();
  const FrameTerms terms = frame_terms(frame, s.g.pose, true);
  VecX r = VecX::Zero(n);
  r.head<6>() = vec_se(terms.gradient);
  RiccatiCoefficients rc;
  rc.A = c_matrix(s.g, s.p, r) - 0.5 * cfg.alpha * MatX::Identity(n, n);
  rc.B = MatX::Zero(n, n);
  Mat6 h = 0.5 * (terms.hessian + terms.hessian.transpose());
  if (cfg.psd_hessian) {
    const Eigen::SelfAdjointEigenSolver<Mat6> eig(h);
    h = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
  }
  rc.B.topLeftCorner<6, 6>() = h;
  rc.C = cfg.s_inverse();
  return rc;
}

MatX riccati_rhs(const FilterState& s, const Frame& frame, const FilterConfig& cfg) {
  return riccati_rhs_value(s.p, riccati_coefficients(s, frame, cfg));
}

VecX state_rhs(const FilterState& s, const Frame& frame, const FilterConfig& cfg) {
  (void)cfg;
  return f_kinematic(s.g) - s.p * r_t(s.g, frame);
}

FilterState mef_step(const FilterState& s, const Frame& frame, const FilterConfig& cfg, StepInfo* info) {
  if (s.p.rows() != cfg.dim() || s.g.order() != cfg.order) {
    throw InvalidArgument("filter state does not match the configured order");
  }
  const RiccatiCoefficients rc = riccati_coefficients(s, frame, cfg);
  const MatX& p = s.p;
  const GroupRhs rhs = [&](const GroupElement& g) -> VecX { return f_kinematic(g) - p * r_t(g, frame); };
  const MidpointResult mid = lie_midpoint_step(s.g, rhs, cfg.delta, cfg.midpoint);

  RiccatiStepInfo rinfo;
  FilterState next{mid.g, riccati_implicit_euler_step(p, rc, cfg.delta, &rinfo), s.t + cfg.delta};
  Eigen::SelfAdjointEigenSolver<MatX> eig(next.p, Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (!(min_eig > 1e-12)) {
    throw RiccatiSolveFailed("information matrix lost definiteness (min eigenvalue " + std::to_string(min_eig) + ")");
  }
  if (rinfo.used_fallback) spdlog::warn("Riccati step at t={} needed the explicit fallback", s.t);
  if (info) {
    info->midpoint_iterations = mid.iterations;
    info->newton_iterations = rinfo.newton_iterations;
    info->riccati_fallback = rinfo.used_fallback;
    info->dropped_points = 0;
    for (const auto& obs : frame.points) {
      if (!(obs.depth > 0.0) || !(std::abs(kappa(s.g.pose, obs.g())) > kMinDepth)) ++info->dropped_points;
    }
  }
  return next;
}

std::vector<FilterState> run_filter(const FilterState& initial, const std::vector<Frame>& frames,
                                    const FilterConfig& cfg) {
  cfg.validate();
  std::vector<FilterState> out;
  out.reserve(frames.size() + 1);
  out.push_back(initial);
  FilterState s = initial;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    try {
      for (int k = 0; k < cfg.steps_per_frame; ++k) {
        StepInfo info;
        s = mef_step(s, frames[l], cfg, &info);
        if (info.dropped_points > 0) {
          spdlog::debug("frame {}: dropped {} degenerate points", l + 1, info.dropped_points);
        }
      }
    } catch (const Error& e) {
      throw FilterFailure(e.what(), static_cast<int>(l) + 1);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace mefse3
