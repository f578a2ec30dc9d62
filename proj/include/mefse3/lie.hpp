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

// Rigid-motion group SE(3), its Lie algebra, and the product group
// SE(3) x R^{6(m-1)} that carries pose plus kinematic derivatives.
//
// Algebra coordinates use the orthonormal basis of se(3) under the trace
// inner product: the rotational generators carry a factor 1/sqrt(2), so
// tr(mat_se(v)^T mat_se(w)) = v^T w.

#include <Eigen/Dense>
#include <array>

namespace mefse3 {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Largest supported kinematic order.
inline constexpr int kMaxOrder = 8;

// Rigid transform [R w; 0 1] with R in SO(3).
class Pose {
 public:
  Pose() : m_(Mat4::Identity()) {}

  // Validates R^T R = I, det R = 1 and the bottom row within `tol`.
  static Pose from_matrix(const Mat4& m, double tol = 1e-9);
  static Pose from_rotation_translation(const Mat3& r, const Vec3& w);
  // Skips validation; for results of closed-form constructions.
  static Pose unchecked(const Mat4& m) { return Pose(m); }

  const Mat4& matrix() const { return m_; }
  Mat3 rotation() const { return m_.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return m_.topRightCorner<3, 1>(); }

  Pose inverse() const;
  Pose operator*(const Pose& other) const { return Pose(m_ * other.m_); }

  // Largest deviation from the group constraints.
  static double constraint_violation(const Mat4& m);

 private:
  explicit Pose(const Mat4& m) : m_(m) {}
  Mat4 m_;
};

// Element (E, v_1, ..., v_{m-1}) of the product group; velocities are stacked.
struct GroupElement {
  Pose pose;
  VecX velocities;  // length 6(m-1)

  GroupElement() : velocities(VecX::Zero(0)) {}
  GroupElement(const Pose& p, const VecX& v);

  static GroupElement identity(int order);
  int order() const { return 1 + static_cast<int>(velocities.size()) / 6; }
  // i-th kinematic derivative, 1-based as in (v_1, ..., v_{m-1}).
  Vec6 velocity(int i) const { return velocities.segment<6>(6 * (i - 1)); }

  GroupElement operator*(const GroupElement& other) const;
  GroupElement inverse() const;
};

// Algebra element of the product group in matrix form.
struct AlgebraElement {
  Mat4 twist;  // se(3) part
  VecX rest;   // flat velocity part, length 6(m-1)
};

Mat3 skew(const Vec3& w);
// Rotational block of mat_se: skew(w) / sqrt(2).
Mat3 mat_so(const Vec3& w);

Mat4 mat_se(const Vec6& v);
// Throws InvalidArgument if xi is not in se(3) up to a relative 1e-9.
Vec6 vec_se(const Mat4& xi);

AlgebraElement mat_g(const VecX& v);
VecX vec_g(const AlgebraElement& xi);

// Orthogonal projection of R^{4x4} onto se(3) under the trace inner product.
Mat4 pr_se(const Mat4& a);

Pose exp_se3(const Mat4& xi);
Pose exp_se3(const Vec6& v);
// Principal logarithm; throws BranchError if the angle exceeds pi - 1e-6.
Mat4 log_se3(const Pose& e);
Vec6 log_se3_vec(const Pose& e);

GroupElement exp_g(const VecX& v);
VecX log_g(const GroupElement& g);

// ad_se_vec(v) * vec_se(eta) = vec_se([mat_se(v), eta]).
Mat6 ad_se_vec(const Vec6& v);
// Adjoint on the product algebra; only the se(3) block is non-zero.
MatX ad_g_vec(const VecX& v);

// Column j is vec_se(pr_se(A E^j B)) with E^j = mat_se(e_j).
Mat6 kron_se(const Mat4& a, const Mat4& b);
// Column j is vec_se(pr_se(A (E^j)^T B)).
Mat6 kron_se_T(const Mat4& a, const Mat4& b);

// Christoffel symbols Gamma^i_{jk} of the Levi-Civita connection of the
// left-invariant trace metric on SE(3). Indices are 0-based.
class ChristoffelTable {
 public:
  double operator()(int i, int j, int k) const { return g_[i][j][k]; }

  // Symbols in the unit-generator basis (skew(e_a), translation e_a); this
  // is the classical table with twelve entries equal to +-1/2 and +-1.
  static const ChristoffelTable& unit_basis();
  // The same connection in vec_se coordinates.
  static const ChristoffelTable& vec_coordinates();

  int nonzero_count() const;

 private:
  std::array<std::array<std::array<double, 6>, 6>, 6> g_{};
};

// (gamma_tilde(z))_{ij} = sum_k Gamma^i_{jk} z_k on the se(3) block, in vec_se
// coordinates. Blocks touching flat velocity coordinates vanish.
MatX gamma_tilde(const VecX& z);
// (gamma_tilde_star(z))_{ij} = sum_k Gamma^i_{kj} z_k.
MatX gamma_tilde_star(const VecX& z);
// The se(3) blocks of gamma_tilde and gamma_tilde_star.
Mat6 gamma_tilde6(const Vec6& z);
Mat6 gamma_tilde_star6(const Vec6& z);

// || vec_se(Log(E1^{-1} E2)) ||.
double geodesic_distance(const Pose& e1, const Pose& e2);

}  // namespace mefse3
