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

#include "mefse3/synth.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mefse3/errors.hpp"
#include "mefse3/integrators.hpp"
#include "mefse3/mef.hpp"

namespace mefse3 {

Track generate_track(const TrackSpec& spec, Rng* rng) {
  if (spec.order < 0 || spec.order + 1 > kMaxOrder) throw InvalidArgument("track order out of range");
  if (static_cast<int>(spec.derivatives.size()) != spec.order) {
    throw InvalidArgument("track needs one initial derivative per order");
  }
  if (spec.frames < 0 || spec.substeps < 1 || !(spec.frame_interval > 0.0)) {
    throw InvalidArgument("invalid track sampling");
  }
  const int dim = 6 * (spec.order + 1);
  MatX chol;
  if (spec.process_noise) {
    if (spec.process_noise->rows() != dim || spec.process_noise->cols() != dim) {
      throw InvalidArgument("process noise covariance must be 6(order+1) square");
    }
    if (!rng) throw InvalidArgument("noisy track generation needs a random generator");
    // Semi-definite covariances are allowed, so factor via eigenvalues.
    Eigen::SelfAdjointEigenSolver<MatX> eig(*spec.process_noise);
    chol = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  VecX v(6 * spec.order);
  for (int i = 0; i < spec.order; ++i) v.segment<6>(6 * i) = spec.derivatives[i];
  GroupElement g(spec.start, v);

  Track track;
  const double h = spec.frame_interval / spec.substeps;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 0; l <= spec.frames; ++l) {
    if (l > 0) {
      for (int k = 0; k < spec.substeps; ++k) {
        g = lie_midpoint_step(g, f_kinematic, h).g;
        if (spec.process_noise) {
          VecX z(dim);
          for (int i = 0; i < dim; ++i) z(i) = normal(*rng);
          g = g * exp_g(std::sqrt(h) * chol * z);
        }
      }
    }
    track.times.push_back(l * spec.frame_interval);
    track.poses.push_back(g.pose);
    track.velocities.push_back(g.velocities);
  }
  return track;
}

Scene frustum_scene(const Pose& camera, int count, const Frustum& f, Rng& rng) {
  std::uniform_real_distribution<double> ux(-f.half_width, f.half_width);
  std::uniform_real_distribution<double> uy(-f.half_height, f.half_height);
  std::uniform_real_distribution<double> ud(f.near, f.far);
  Scene s;
  s.points.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const double d = ud(rng);
    const Vec4 local(d * x, d * y, d, 1.0);
    s.points.push_back((camera.matrix() * local).head<3>());
  }
  return s;
}

std::vector<Observation> observe_frame(const Pose& e_prev, const Pose& e_cur, const Scene& scene, int n, Rng& rng) {
  const Pose rel = e_prev.inverse() * e_cur;
  const Mat4 prev_inv = e_prev.inverse().matrix();
  std::vector<std::size_t> idx(scene.points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Observation> out;
  for (std::size_t i : idx) {
    if (static_cast<int>(out.size()) == n) break;
    const Vec4 local = prev_inv * scene.points[i].homogeneous();
    if (!(local.z() > 1e-6)) continue;
    Observation o;
    o.depth = local.z();
    o.pixel = local.head<2>() / local.z();
    const Vec4 g = o.g();
    if (!(kappa(rel, g) > kMinDepth)) continue;
    o.y = h_k(rel, g);
    out.push_back(o);
  }
  if (static_cast<int>(out.size()) < n) {
    throw InvalidArgument("scene has only " + std::to_string(out.size()) + " points visible in both cameras");
  }
  return out;
}

NoiseModel NoiseModel::parse(const std::string& name, double variance) {
  NoiseModel m;
  m.variance = variance;
  if (name == "none") {
    m.kind = Kind::None;
  } else if (name == "AG") {
    m.kind = Kind::AdditiveGaussian;
  } else if (name == "AU") {
    m.kind = Kind::AdditiveUniform;
  } else if (name == "MG") {
    m.kind = Kind::MultiplicativeGaussian;
    m.mean = 1.0;
  } else if (name == "MU") {
    m.kind = Kind::MultiplicativeUniform;
    m.mean = 1.0;
  } else {
    throw ConfigError("unknown noise model '" + name + "' (expected none, AG, AU, MG or MU)");
  }
  if (!(variance >= 0.0)) throw ConfigError("noise variance must be non-negative");
  return m;
}

std::string NoiseModel::name() const {
  switch (kind) {
    case Kind::AdditiveGaussian: return "AG";
    case Kind::AdditiveUniform: return "AU";
    case Kind::MultiplicativeGaussian: return "MG";
    case Kind::MultiplicativeUniform: return "MU";
    default: return "none";
  }
}

void apply_noise(std::vector<Observation>& obs, const NoiseModel& model, Rng& rng) {
  if (model.kind == NoiseModel::Kind::None) return;
  const double sd = std::sqrt(model.variance);
  const double half = std::sqrt(3.0 * model.variance);
  std::normal_distribution<double> gauss(model.mean, sd);
  std::uniform_real_distribution<double> unif(model.mean - half, model.mean + half);
  const bool uniform = model.kind == NoiseModel::Kind::AdditiveUniform ||
                       model.kind == NoiseModel::Kind::MultiplicativeUniform;
  const bool additive = model.kind == NoiseModel::Kind::AdditiveGaussian ||
                        model.kind == NoiseModel::Kind::AdditiveUniform;
  auto draw = [&] { return model.variance == 0.0 ? model.mean : (uniform ? unif(rng) : gauss(rng)); };
  for (auto& o : obs) {
    for (int c = 0; c < 2; ++c) {
      const double e = draw();
      if (additive) {
        o.y(c) += e;
      } else {
        o.y(c) = o.pixel(c) + (o.y(c) - o.pixel(c)) * e;
      }
    }
  }
}

std::vector<Frame> simulate_frames(const Track& track, int n, const Frustum& frustum, const NoiseModel& noise,
                                   const Mat2& weight, Rng& rng) {
  std::vector<Frame> frames;
  for (std::size_t l = 1; l < track.size(); ++l) {
    std::vector<Observation> obs;
    // A fresh scene per frame pair; a few retries cover rare large motions.
    for (int attempt = 0;; ++attempt) {
      const Scene scene = frustum_scene(track.poses[l - 1], 4 * n, frustum, rng);
      try {
        obs = observe_frame(track.poses[l - 1], track.poses[l], scene, n, rng);
        break;
      } catch (const InvalidArgument&) {
        if (attempt == 9) throw;
      }
    }
    apply_noise(obs, noise, rng);
    Frame f;
    f.points = std::move(obs);
    f.point_weight = weight;
    frames.push_back(std::move(f));
  }
  return frames;
}

double rotation_error_deg(const Pose& gt, const Pose& est) {
  const Mat3 r = gt.rotation().transpose() * est.rotation();
  const Vec3 s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * s.norm(), 0.5 * (r.trace() - 1.0)) * 180.0 / M_PI;
}

double translation_error(const Pose& gt, const Pose& est) { return (gt.translation() - est.translation()).norm(); }

std::vector<double> geodesic_error_series(const std::vector<Pose>& gt, const std::vector<Pose>& est) {
  if (gt.size() != est.size()) throw InvalidArgument("trajectories differ in length");
  std::vector<double> out;
  out.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    try {
      out.push_back(geodesic_distance(gt[i], est[i]));
    } catch (const BranchError&) {
      spdlog::warn("frame {}: geodesic error undefined (rotation near pi)", i);
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

}  // namespace mefse3
