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

#include "mefse3/lie.hpp"

#include <cmath>
#include <string>

#include "mefse3/errors.hpp"

namespace mefse3 {
namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Vec3 unskew(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

void require_algebra_length(Eigen::Index n, const char* who) {
  if (n < 6 || n % 6 != 0 || n > 6 * kMaxOrder) {
    throw InvalidArgument(std::string(who) + ": length " + std::to_string(n) +
                          " is not 6m with 1 <= m <= " + std::to_string(kMaxOrder));
  }
}

}  // namespace

Pose Pose::from_matrix(const Mat4& m, double tol) {
  const double dev = constraint_violation(m);
  if (!(dev <= tol)) {
    throw InvalidArgument("matrix is not a rigid transform (deviation " + std::to_string(dev) + ")");
  }
  return Pose(m);
}

Pose Pose::from_rotation_translation(const Mat3& r, const Vec3& w) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = w;
  return from_matrix(m);
}

double Pose::constraint_violation(const Mat4& m) {
  const Mat3 r = m.topLeftCorner<3, 3>();
  double dev = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  dev = std::max(dev, std::abs(r.determinant() - 1.0));
  dev = std::max(dev, m.block<1, 3>(3, 0).cwiseAbs().maxCoeff());
  dev = std::max(dev, std::abs(m(3, 3) - 1.0));
  return dev;
}

Pose Pose::inverse() const {
  Mat4 inv = Mat4::Identity();
  const Mat3 rt = rotation().transpose();
  inv.topLeftCorner<3, 3>() = rt;
  inv.topRightCorner<3, 1>() = -rt * translation();
  return Pose(inv);
}

GroupElement::GroupElement(const Pose& p, const VecX& v) : pose(p), velocities(v) {
  if (v.size() % 6 != 0 || v.size() > 6 * (kMaxOrder - 1)) {
    throw InvalidArgument("velocity stack must have length 6(m-1)");
  }
}

GroupElement GroupElement::identity(int order) {
  if (order < 1 || order > kMaxOrder) throw InvalidArgument("unsupported kinematic order");
  return GroupElement(Pose(), VecX::Zero(6 * (order - 1)));
}

GroupElement GroupElement::operator*(const GroupElement& other) const {
  if (other.velocities.size() != velocities.size()) throw InvalidArgument("order mismatch");
  return GroupElement(pose * other.pose, velocities + other.velocities);
}

GroupElement GroupElement::inverse() const { return GroupElement(pose.inverse(), -velocities); }

Mat3 skew(const Vec3& w) {
  Mat3 s;
  s << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return s;
}

Mat3 mat_so(const Vec3& w) { return kInvSqrt2 * skew(w); }

Mat4 mat_se(const Vec6& v) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = mat_so(v.head<3>());
  m.topRightCorner<3, 1>() = v.tail<3>();
  return m;
}

Vec6 vec_se(const Mat4& xi) {
  const Mat3 s = xi.topLeftCorner<3, 3>();
  const double scale = 1.0 + xi.cwiseAbs().maxCoeff();
  const double dev = std::max((s + s.transpose()).cwiseAbs().maxCoeff(), xi.row(3).cwiseAbs().maxCoeff());
  if (!(dev <= 1e-9 * scale)) {
    throw InvalidArgument("matrix is not in se(3) (deviation " + std::to_string(dev) + ")");
  }
  Vec6 v;
  v.head<3>() = std::sqrt(2.0) * unskew(0.5 * (s - s.transpose()));
  v.tail<3>() = xi.topRightCorner<3, 1>();
  return v;
}

AlgebraElement mat_g(const VecX& v) {
  require_algebra_length(v.size(), "mat_g");
  return AlgebraElement{mat_se(v.head<6>()), v.tail(v.size() - 6)};
}

VecX vec_g(const AlgebraElement& xi) {
  if (xi.rest.size() % 6 != 0 || xi.rest.size() > 6 * (kMaxOrder - 1)) {
    throw InvalidArgument("vec_g: flat part must have length 6(m-1)");
  }
  VecX v(6 + xi.rest.size());
  v.head<6>() = vec_se(xi.twist);
  v.tail(xi.rest.size()) = xi.rest;
  return v;
}

Mat4 pr_se(const Mat4& a) {
  Mat4 p = Mat4::Zero();
  const Mat3 s = a.topLeftCorner<3, 3>();
  p.topLeftCorner<3, 3>() = 0.5 * (s - s.transpose());
  p.topRightCorner<3, 1>() = a.topRightCorner<3, 1>();
  return p;
}

Pose exp_se3(const Mat4& xi) {
  const Mat3 omega = xi.topLeftCorner<3, 3>();
  const Vec3 u = xi.topRightCorner<3, 1>();
  const double th2 = unskew(omega).squaredNorm();
  const double th = std::sqrt(th2);
  double a, b, c;
  if (th < 1e-3) {
    const double th4 = th2 * th2;
    a = 1.0 - th2 / 6.0 + th4 / 120.0;
    b = 0.5 - th2 / 24.0 + th4 / 720.0;
    c = 1.0 / 6.0 - th2 / 120.0 + th4 / 5040.0;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th2;
    c = (th - std::sin(th)) / (th2 * th);
  }
  const Mat3 omega2 = omega * omega;
  Mat4 e = Mat4::Identity();
  e.topLeftCorner<3, 3>() = Mat3::Identity() + a * omega + b * omega2;
  e.topRightCorner<3, 1>() = (Mat3::Identity() + b * omega + c * omega2) * u;
  return Pose::unchecked(e);
}

Pose exp_se3(const Vec6& v) { return exp_se3(mat_se(v)); }

Mat4 log_se3(const Pose& e) {
  const Mat3 r = e.rotation();
  const Vec3 s = 0.5 * unskew(r - r.transpose());  // sin(theta) * axis
  const double cos_th = 0.5 * (r.trace() - 1.0);
  const double sin_th = s.norm();
  const double th = std::atan2(sin_th, cos_th);
  if (th > M_PI - 1e-6) {
    throw BranchError("log_se3: rotation angle " + std::to_string(th) + " too close to pi");
  }
  const double th2 = th * th;
  double ratio, d;  // theta / sin(theta) and the V^{-1} quadratic coefficient
  if (th < 1e-3) {
    ratio = 1.0 + th2 / 6.0 + 7.0 * th2 * th2 / 360.0;
    d = 1.0 / 12.0 + th2 / 720.0 + th2 * th2 / 30240.0;
  } else {
    ratio = th / sin_th;
    d = (1.0 - th * sin_th / (2.0 * (1.0 - cos_th))) / th2;
  }
  const Mat3 omega = ratio * skew(s);
  const Mat3 v_inv = Mat3::Identity() - 0.5 * omega + d * omega * omega;
  Mat4 xi = Mat4::Zero();
  xi.topLeftCorner<3, 3>() = omega;
  xi.topRightCorner<3, 1>() = v_inv * e.translation();
  return xi;
}

Vec6 log_se3_vec(const Pose& e) { return vec_se(log_se3(e)); }

GroupElement exp_g(const VecX& v) {
  require_algebra_length(v.size(), "exp_g");
  return GroupElement(exp_se3(Vec6(v.head<6>())), v.tail(v.size() - 6));
}

VecX log_g(const GroupElement& g) {
  VecX v(6 + g.velocities.size());
  v.head<6>() = log_se3_vec(g.pose);
  v.tail(g.velocities.size()) = g.velocities;
  return v;
}

Mat6 ad_se_vec(const Vec6& v) {
  Mat6 ad = Mat6::Zero();
  const Mat3 w = mat_so(v.head<3>());
  ad.topLeftCorner<3, 3>() = w;
  ad.bottomRightCorner<3, 3>() = w;
  ad.bottomLeftCorner<3, 3>() = mat_so(v.tail<3>());
  return ad;
}

MatX ad_g_vec(const VecX& v) {
  require_algebra_length(v.size(), "ad_g_vec");
  MatX ad = MatX::Zero(v.size(), v.size());
  ad.topLeftCorner<6, 6>() = ad_se_vec(v.head<6>());
  return ad;
}

Mat6 kron_se(const Mat4& a, const Mat4& b) {
  Mat6 k;
  for (int j = 0; j < 6; ++j) k.col(j) = vec_se(pr_se(a * mat_se(Vec6::Unit(j)) * b));
  return k;
}

Mat6 kron_se_T(const Mat4& a, const Mat4& b) {
  Mat6 k;
  for (int j = 0; j < 6; ++j) k.col(j) = vec_se(pr_se(a * mat_se(Vec6::Unit(j)).transpose() * b));
  return k;
}

const ChristoffelTable& ChristoffelTable::unit_basis() {
  static const ChristoffelTable table = [] {
    ChristoffelTable t;
    // {upper, lower1, lower2, value}, 1-based.
    const double entries[12][4] = {
        {3, 1, 2, 0.5},  {1, 2, 3, 0.5},  {2, 3, 1, 0.5},  {2, 1, 3, -0.5},
        {3, 2, 1, -0.5}, {1, 3, 2, -0.5}, {6, 1, 5, 1.0},  {4, 2, 6, 1.0},
        {5, 3, 4, 1.0},  {5, 1, 6, -1.0}, {6, 2, 4, -1.0}, {4, 3, 5, -1.0},
    };
    for (const auto& e : entries) {
      t.g_[static_cast<int>(e[0]) - 1][static_cast<int>(e[1]) - 1][static_cast<int>(e[2]) - 1] = e[3];
    }
    return t;
  }();
  return table;
}

const ChristoffelTable& ChristoffelTable::vec_coordinates() {
  // A vec_se coordinate x_a is the unit-basis coordinate divided by c_a.
  static const ChristoffelTable table = [] {
    const double c[6] = {kInvSqrt2, kInvSqrt2, kInvSqrt2, 1.0, 1.0, 1.0};
    const ChristoffelTable& u = unit_basis();
    ChristoffelTable t;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 6; ++k) t.g_[i][j][k] = u.g_[i][j][k] * c[j] * c[k] / c[i];
    return t;
  }();
  return table;
}

int ChristoffelTable::nonzero_count() const {
  int n = 0;
  for (const auto& a : g_)
    for (const auto& b : a)
      for (double x : b) n += (x != 0.0);
  return n;
}

Mat6 gamma_tilde6(const Vec6& z) {
  const ChristoffelTable& gam = ChristoffelTable::vec_coordinates();
  Mat6 out = Mat6::Zero();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k) out(i, j) += gam(i, j, k) * z(k);
  return out;
}

Mat6 gamma_tilde_star6(const Vec6& z) {
  const ChristoffelTable& gam = ChristoffelTable::vec_coordinates();
  Mat6 out = Mat6::Zero();
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      for (int k = 0; k < 6; ++k) out(i, j) += gam(i, k, j) * z(k);
  return out;
}

MatX gamma_tilde(const VecX& z) {
  require_algebra_length(z.size(), "gamma_tilde");
  MatX out = MatX::Zero(z.size(), z.size());
  out.topLeftCorner<6, 6>() = gamma_tilde6(z.head<6>());
  return out;
}

MatX gamma_tilde_star(const VecX& z) {
  require_algebra_length(z.size(), "gamma_tilde_star");
  MatX out = MatX::Zero(z.size(), z.size());
  out.topLeftCorner<6, 6>() = gamma_tilde_star6(z.head<6>());
  return out;
}

double geodesic_distance(const Pose& e1, const Pose& e2) {
  return log_se3_vec(e1.inverse() * e2).norm();
}

}  // namespace mefse3
