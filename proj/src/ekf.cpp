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

#include "mefse3/ekf.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mefse3/errors.hpp"
#include "mefse3/integrators.hpp"
#include "mefse3/mef.hpp"

namespace mefse3 {
namespace {

Mat12 ad12(int i) {
  Mat12 a = Mat12::Zero();
  a.topLeftCorner<6, 6>() = ad_se_vec(Vec6::Unit(i));
  return a;
}

template <class M>
M symmetrize(const M& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

Mat12 ekf_J(const GroupElement& g, const Mat12& s) {
  if (g.order() != 2) throw InvalidArgument("the EKF supports second-order kinematics only");
  Mat12 off = s;
  off.diagonal().setZero();
  if (off.cwiseAbs().maxCoeff() > 0.0) throw InvalidArgument("C(S) is only available for diagonal S");
  Mat12 j = shift_matrix(2);
  j -= ad_g_vec(f_kinematic(g));
  Mat3 xi = Mat3::Zero();
  xi.diagonal() << s(1, 1) + s(2, 2), s(0, 0) + s(2, 2), s(0, 0) + s(1, 1);
  xi = -xi;
  j.block<3, 3>(0, 0) += xi / 12.0;
  j.block<3, 3>(3, 3) += xi / 12.0;
  return j;
}

std::pair<Mat12, Mat12> expectation_terms(const Mat12& s) {
  Mat12 e1 = Mat12::Zero();
  Mat12 e2 = Mat12::Zero();
  for (int i = 0; i < 6; ++i) {
    const Mat12 ai = ad12(i);
    for (int j = 0; j < 6; ++j) {
      if (s(i, j) == 0.0) continue;
      const Mat12 aj = ad12(j);
      e1 += s(i, j) * ai * s * aj.transpose();
      e2 += s(i, j) * ai * aj;
    }
  }
  return {e1, e2};
}

Mat12 phi_jacobian(const Vec12& v) {
  const Mat6 ad = ad_se_vec(v.head<6>());
  Mat6 term = Mat6::Identity();
  Mat6 sum = Mat6::Identity();
  for (int n = 1; n < 200; ++n) {
    term = (-1.0 / (n + 1)) * term * ad;
    sum += term;
    if (term.norm() < 1e-15) break;
  }
  Mat12 phi = Mat12::Identity();
  phi.topLeftCorner<6, 6>() = sum;
  return phi;
}

Mat12 ekf_covariance_rhs(const GroupElement& g, const Mat12& p, const Mat12& s) {
  const Mat12 j = ekf_J(g, s);
  const auto [e1, e2] = expectation_terms(s);
  return j * p + p * j.transpose() + s + 0.25 * e1 + (e2 * s + s * e2.transpose()) / 12.0;
}

EkfState ekf_propagate(const EkfState& state, double dt, const EkfConfig& cfg) {
  if (dt <= 0.0) return state;
  const int steps = std::max(1, static_cast<int>(std::ceil(dt / cfg.delta - 1e-9)));
  const double h = dt / steps;
  EkfState s = state;
  // v is constant during propagation, so J and the forcing terms are too.
  const Mat12 j = ekf_J(s.g, cfg.S);
  const auto [e1, e2] = expectation_terms(cfg.S);
  const Mat12 forcing = cfg.S + 0.25 * e1 + (e2 * cfg.S + cfg.S * e2.transpose()) / 12.0;
  auto rhs = [&](const Mat12& p) -> Mat12 { return j * p + p * j.transpose() + forcing; };
  for (int k = 0; k < steps; ++k) {
    s.g = lie_midpoint_step(s.g, f_kinematic, h).g;
    s.p = symmetrize(rk4_step(s.p, rhs, h));
  }
  s.t += dt;
  return s;
}

EkfState ekf_update(const EkfState& state, const Frame& frame, const EkfConfig& cfg) {
  const Pose& e = state.g.pose;
  Eigen::MatrixXd h;
  Eigen::VectorXd res;
  Eigen::MatrixXd q;
  if (!frame.points.empty()) {
    h = ekf_H_nonlinear(e, frame.points);
    res = Vec2::Zero();
    for (const auto& o : frame.points) res += o.y - h_k(e, o.g());
    q = cfg.point_cov;
  } else if (!frame.linear.empty()) {
    std::vector<Vec4> dirs;
    res = Vec4::Zero();
    for (const auto& o : frame.linear) {
      dirs.push_back(o.a);
      res += o.y - e.matrix() * o.a;
    }
    h = ekf_H_linear(e, dirs);
    q = cfg.linear_cov;
  } else {
    return state;
  }
  const Eigen::MatrixXd innov = h * state.p * h.transpose() + q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(innov), Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) throw SingularInnovation("innovation covariance is singular or ill-conditioned");
  const Eigen::MatrixXd k = state.p * h.transpose() * innov.ldlt().solve(Eigen::MatrixXd::Identity(q.rows(), q.rows()));
  const Vec12 m = k * res;
  EkfState out = state;
  out.g = state.g * exp_g(m);
  const Mat12 phi = phi_jacobian(m);
  Mat12 p = symmetrize(Mat12(phi * (Mat12::Identity() - k * h) * state.p * phi.transpose()));
  Eigen::SelfAdjointEigenSolver<Mat12> pe(p);
  if (pe.eigenvalues().minCoeff() < 0.0) {
    p = pe.eigenvectors() * pe.eigenvalues().cwiseMax(0.0).asDiagonal() * pe.eigenvectors().transpose();
  }
  out.p = p;
  return out;
}

std::vector<EkfState> ekf_run(const EkfState& initial, const std::vector<Frame>& frames, const EkfConfig& cfg) {
  std::vector<EkfState> out{initial};
  EkfState s = initial;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    try {
      s = ekf_update(ekf_propagate(s, cfg.frame_interval, cfg), frames[l], cfg);
    } catch (const Error& e) {
      throw FilterFailure(e.what(), static_cast<int>(l) + 1);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace mefse3
