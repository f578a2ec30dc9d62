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


#include <gtest/gtest.h>

#include <cmath>

#include "mefse3/ekf.hpp"
#include "mefse3/errors.hpp"
#include "mefse3/mef.hpp"
#include "test_support.hpp"

namespace mefse3 {
namespace {

using testing::Rng;

Mat12 ad12(const Vec6& v) {
  Mat12 a = Mat12::Zero();
  a.topLeftCorner<6, 6>() = ad_se_vec(v);
  return a;
}

Frame linear_frame(const Pose& e) {
  Frame f;
  for (int k = 0; k < 4; ++k) {
    LinearObservation o;
    o.a = Vec4::Unit(k);
    o.y = e.matrix() * o.a;
    f.linear.push_back(o);
  }
  return f;
}

TEST(EkfModel, JacobianStructure) {
  Rng rng(60);
  const Vec6 v = testing::random_vec6(rng);
  const GroupElement g(testing::random_pose(rng), VecX(v));
  Mat12 s = Mat12::Zero();
  s.diagonal() = testing::random_vec(rng, 12).cwiseAbs();
  const Mat12 j = ekf_J(g, s);
  Mat3 xi = Mat3::Zero();
  xi.diagonal() << s(1, 1) + s(2, 2), s(0, 0) + s(2, 2), s(0, 0) + s(1, 1);
  Mat12 want = shift_matrix(2) - ad12(v);
  want.block<3, 3>(0, 0) -= xi / 12.0;
  want.block<3, 3>(3, 3) -= xi / 12.0;
  EXPECT_LT((j - want).norm(), 1e-14);
  s(0, 1) = s(1, 0) = 0.1;
  EXPECT_THROW(ekf_J(g, s), InvalidArgument);
  EXPECT_THROW(ekf_J(GroupElement::identity(3), Mat12::Identity()), InvalidArgument);
}

TEST(EkfModel, ExpectationTermsMatchMonteCarlo) {
  Rng rng(61);
  const Mat12 l = Mat12::Random() * 0.5;
  const Mat12 s = l * l.transpose() + 0.1 * Mat12::Identity();
  const auto [e1, e2] = expectation_terms(s);
  const Eigen::LLT<Mat12> chol(s);
  std::normal_distribution<double> normal;
  Mat12 m1 = Mat12::Zero();
  Mat12 m2 = Mat12::Zero();
  const int samples = 200000;
  for (int i = 0; i < samples; ++i) {
    Vec12 z;
    for (int k = 0; k < 12; ++k) z(k) = normal(rng);
    const Vec12 eps = chol.matrixL() * z;
    const Mat12 a = ad12(eps.head<6>());
    m1 += a * s * a.transpose();
    m2 += a * a;
  }
  m1 /= samples;
  m2 /= samples;
  EXPECT_LT((m1 - e1).norm(), 0.02 * e1.norm());
  EXPECT_LT((m2 - e2).norm(), 0.02 * e2.norm());
}

TEST(EkfModel, PhiIsTheRightJacobianOfExp) {
  Rng rng(62);
  for (int i = 0; i < 20; ++i) {
    const Vec12 v = testing::random_vec(rng, 12);
    const Mat12 phi = phi_jacobian(v);
    const Vec6 d = testing::random_vec6(rng);
    const double t = 1e-6;
    // exp(v + t d) = exp(v) exp(t Phi(v) d + O(t^2))
    auto lhs = [&](double tau) {
      return log_se3_vec(exp_se3(Vec6(v.head<6>())).inverse() * exp_se3(Vec6(v.head<6>() + tau * d)));
    };
    const Vec6 fd = (lhs(t) - lhs(-t)) / (2 * t);
    EXPECT_LT((phi.topLeftCorner<6, 6>() * d - fd).norm(), 1e-7 * std::max(1.0, fd.norm()));
    EXPECT_TRUE((phi.bottomRightCorner<6, 6>() == Mat6::Identity()));
  }
  EXPECT_EQ(phi_jacobian(Vec12::Zero()), Mat12::Identity());
}

TEST(EkfPropagate, ConstantVelocityAndCovarianceGrowth) {
  Vec6 v;
  v << 0.1, 0.0, -0.05, 0.2, 0.0, 1.0;
  EkfState s;
  s.g.velocities = v;
  EkfConfig cfg;
  cfg.delta = 0.01;
  const EkfState next = ekf_propagate(s, 0.5, cfg);
  EXPECT_LT((next.g.pose.matrix() - exp_se3(Vec6(0.5 * v)).matrix()).norm(), 1e-12);
  EXPECT_NEAR(next.t, 0.5, 1e-15);
  EXPECT_LT((next.p - next.p.transpose()).norm(), 1e-12);
  EXPECT_GT(next.p.trace(), s.p.trace());
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat12>(next.p).eigenvalues().minCoeff(), 0.0);
}

TEST(EkfPropagate, CovarianceMatchesRightHandSide) {
  EkfState s;
  EkfConfig cfg;
  cfg.delta = 1e-3;
  const EkfState next = ekf_propagate(s, 1e-3, cfg);
  const Mat12 rhs = ekf_covariance_rhs(s.g, s.p, cfg.S);
  EXPECT_LT(((next.p - s.p) / 1e-3 - rhs).norm(), 1e-2 * rhs.norm());
}

TEST(EkfUpdate, ExactObservationsKeepStateAndShrinkCovariance) {
  Rng rng(63);
  EkfState s;
  s.g.pose = testing::random_pose(rng);
  EkfConfig cfg;
  cfg.linear_cov = 1e-4 * Mat4::Identity();
  const EkfState next = ekf_update(s, linear_frame(s.g.pose), cfg);
  EXPECT_LT((next.g.pose.matrix() - s.g.pose.matrix()).norm(), 1e-12);
  EXPECT_LT(next.p.trace(), s.p.trace());
  EXPECT_LT((next.p - next.p.transpose()).norm(), 1e-12);
}

TEST(EkfUpdate, SingularInnovationThrows) {
  EkfState s;
  EkfConfig cfg;
  cfg.linear_cov = Mat4::Zero();
  Frame f;
  LinearObservation o;
  o.a = Vec4::Unit(3);
  o.y = o.a;
  f.linear = {o};
  EXPECT_THROW(ekf_update(s, f, cfg), SingularInnovation);
}

TEST(EkfUpdate, EmptyFrameIsANoOp) {
  EkfState s;
  const EkfState next = ekf_update(s, Frame{}, EkfConfig{});
  EXPECT_EQ(next.p, s.p);
}

TEST(EkfRun, TracksFromTruthOnNoiselessLinearData) {
  Vec6 v;
  v << 0.05, -0.02, 0.03, 0.1, 0.05, 0.2;
  EkfConfig cfg;
  cfg.S = 1e-6 * Mat12::Identity();
  cfg.linear_cov = 1e-6 * Mat4::Identity();
  cfg.delta = 0.01;
  cfg.frame_interval = 0.1;
  EkfState s0;
  s0.g.velocities = v;
  std::vector<Frame> frames;
  for (int l = 1; l <= 5; ++l) frames.push_back(linear_frame(exp_se3(Vec6(0.1 * l * v))));
  const auto states = ekf_run(s0, frames, cfg);
  ASSERT_EQ(states.size(), 6u);
  for (int l = 1; l <= 5; ++l) {
    EXPECT_LT(geodesic_distance(exp_se3(Vec6(0.1 * l * v)), states[l].g.pose), 1e-6) << l;
  }
}

}  // namespace
}  // namespace mefse3
