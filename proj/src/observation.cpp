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

#include "mefse3/observation.hpp"

#include <cmath>
#include <string>

#include "mefse3/errors.hpp"

namespace mefse3 {
namespace {

using Mat24 = Eigen::Matrix<double, 2, 4>;

const Vec4 kE3 = Vec4::Unit(2);

Mat24 row_selector() {
  Mat24 s = Mat24::Zero();
  s(0, 0) = 1.0;
  s(1, 1) = 1.0;
  return s;
}

// Quantities shared by the projective formulas at a fixed (E, g).
struct Projection {
  Mat4 e_inv;
  Vec4 p;  // E^{-1} g
  double k;

  Projection(const Pose& e, const Vec4& g) : Projection(e.inverse().matrix(), g) {}
  Projection(const Mat4& inv, const Vec4& g) : e_inv(inv), p(e_inv * g), k(p(2)) {
    if (!(std::abs(k) > kMinDepth)) {
      throw DegenerateDepth("point depth " + std::to_string(k) + " in camera frame is degenerate");
    }
  }
  Vec2 h() const { return p.head<2>() / k; }
  // Derivative of h with respect to p: k^{-1} I_hat - k^{-2} I_hat p e_3^T.
  Mat24 m() const { return row_selector() / k - p.head<2>() * kE3.transpose() / (k * k); }
};

Mat4 gradient_from(const Projection& pr, const Vec4& g, const Vec2& y, const Mat2& q);

}  // namespace

Vec4 Observation::g() const { return Vec4(depth * pixel.x(), depth * pixel.y(), depth, 1.0); }

double kappa(const Pose& e, const Vec4& g) { return (e.inverse().matrix() * g)(2); }

Vec2 h_k(const Pose& e, const Vec4& g) { return Projection(e, g).h(); }

Vec2 residual_vec(const Observation& obs, const Pose& e) { return obs.y - h_k(e, obs.g()); }

double residual_cost(const Observation& obs, const Pose& e, const Mat2& q) {
  const Vec2 r = residual_vec(obs, e);
  return 0.5 * r.dot(q * r);
}

Mat4 A_k(const Pose& e, const Vec4& g, const Vec2& y, const Mat2& q) {
  return gradient_from(Projection(e, g), g, y, q);
}

Vec2 dh_k(const Pose& e, const Vec4& g, const Mat4& xi) {
  const Projection pr(e, g);
  const Vec4 u = pr.e_inv * xi * pr.p;
  return u(2) / (pr.k * pr.k) * pr.p.head<2>() - u.head<2>() / pr.k;
}

namespace {

Mat4 gradient_from(const Projection& pr, const Vec4& g, const Vec2& y, const Mat2& q) {
  return pr.m().transpose() * q * (y - pr.h()) * (pr.e_inv * g).transpose();
}

Vec6 zeta_from(const Projection& pr, const Vec4& g, const Vec2& y, const Mat2& q, const Mat4& eta) {
  const double k = pr.k;
  const double k2 = k * k;
  const Vec4 u = pr.e_inv * eta * pr.p;
  const Vec2 ip = pr.p.head<2>();
  const Vec2 r = y - pr.h();
  const Mat24 m = pr.m();
  const Mat24 dm =
      u(2) / k2 * row_selector() - 2.0 * u(2) / (k2 * k) * ip * kE3.transpose() + u.head<2>() * kE3.transpose() / k2;
  const Vec2 minus_dh = u.head<2>() / k - u(2) / k2 * ip;
  const Eigen::RowVector4d gt_einv_t = (pr.e_inv * g).transpose();
  const Mat4 d_einv = -pr.e_inv * eta * pr.e_inv;
  const Mat4 da = dm.transpose() * q * r * gt_einv_t + m.transpose() * q * minus_dh * gt_einv_t +
                  m.transpose() * q * r * (d_einv * g).transpose();
  return vec_se(pr_se(da));
}

Mat6 hessian_from(const Projection& pr, const Vec4& g, const Vec2& y, const Mat2& q) {
  Mat6 d;
  for (int j = 0; j < 6; ++j) d.col(j) = zeta_from(pr, g, y, q, mat_se(Vec6::Unit(j)));
  return d;
}

}  // namespace

Vec6 zeta_k(const Pose& e, const Vec4& g, const Vec2& y, const Mat2& q, const Mat4& eta) {
  return zeta_from(Projection(e, g), g, y, q, eta);
}

Mat6 D_k(const Pose& e, const Vec4& g, const Vec2& y, const Mat2& q) {
  return hessian_from(Projection(e, g), g, y, q);
}

Mat4 A_k_linear(const Pose& e, const Vec4& a, const Vec4& y, const Mat4& q) {
  const Mat4& em = e.matrix();
  return em.transpose() * q * (em * a - y) * a.transpose();
}

Vec6 zeta_linear(const Pose& e, const Vec4& a, const Vec4& y, const Mat4& q, const Mat4& eta) {
  const Mat4& em = e.matrix();
  return vec_se(pr_se(eta.transpose() * q * (em * a - y) * a.transpose() + em.transpose() * q * eta * a * a.transpose()));
}

Mat6 D_k_linear(const Pose& e, const Vec4& a, const Vec4& y, const Mat4& q) {
  Mat6 d;
  for (int j = 0; j < 6; ++j) d.col(j) = zeta_linear(e, a, y, q, mat_se(Vec6::Unit(j)));
  return d;
}

double frame_cost(const Frame& frame, const Pose& e) {
  double c = 0.0;
  for (const auto& obs : frame.points) {
    try {
      c += residual_cost(obs, e, frame.point_weight);
    } catch (const DegenerateDepth&) {
    }
  }
  for (const auto& lin : frame.linear) {
    const Vec4 r = e.matrix() * lin.a - lin.y;
    c += 0.5 * r.dot(frame.linear_weight * r);
  }
  return c;
}

FrameTerms frame_terms(const Frame& frame, const Pose& e, bool with_hessian) {
  FrameTerms t;
  auto add = [&](const Mat4& a, auto&& hess) {
    const Mat4 pa = pr_se(a);
    t.gradient += pa;
    if (with_hessian) t.hessian += gamma_tilde6(vec_se(pa)) + hess();
    ++t.used;
  };
  const Mat4 e_inv = e.inverse().matrix();
  for (const auto& obs : frame.points) {
    const Vec4 g = obs.g();
    if (!(obs.depth > 0.0) || !(std::abs((e_inv * g)(2)) > kMinDepth)) {
      ++t.dropped;
      continue;
    }
    const Projection pr(e_inv, g);
    add(gradient_from(pr, g, obs.y, frame.point_weight), [&] { return hessian_from(pr, g, obs.y, frame.point_weight); });
  }
  for (const auto& lin : frame.linear) {
    add(A_k_linear(e, lin.a, lin.y, frame.linear_weight),
        [&] { return D_k_linear(e, lin.a, lin.y, frame.linear_weight); });
  }
  return t;
}

Eigen::Matrix<double, 2, 12> ekf_H_nonlinear(const Pose& e, const std::vector<Observation>& obs) {
  Eigen::Matrix<double, 2, 12> h = Eigen::Matrix<double, 2, 12>::Zero();
  for (const auto& o : obs) {
    const Projection pr(e, o.g());
    for (int j = 0; j < 2; ++j) {
      const Mat4 rho =
          (pr.p(j) / (pr.k * pr.k) * pr.p * kE3.transpose() - pr.p * Vec4::Unit(j).transpose() / pr.k).transpose();
      h.block<1, 6>(j, 0) += vec_se(pr_se(rho)).transpose();
    }
  }
  return h;
}

Eigen::Matrix<double, 4, 12> ekf_H_linear(const Pose& e, const std::vector<Vec4>& directions) {
  Eigen::Matrix<double, 4, 12> h = Eigen::Matrix<double, 4, 12>::Zero();
  for (const auto& a : directions) {
    for (int i = 0; i < 4; ++i) {
      h.block<1, 6>(i, 0) += vec_se(pr_se(e.matrix().transpose() * Vec4::Unit(i) * a.transpose())).transpose();
    }
  }
  return h;
}

}  // namespace mefse3
