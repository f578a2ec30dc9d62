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


#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "mefse3/errors.hpp"
#include "mefse3/io.hpp"

namespace mefse3::app {
namespace {

Vec6 make_vec6(double a, double b, double c, double d, double e, double f) {
  Vec6 v;
  v << a, b, c, d, e, f;
  return v;
}

// Pose the comparison ground truth starts from.
Pose comparison_start() { return exp_se3(make_vec6(0.4, -0.3, 0.5, 1.0, -0.5, 0.8)); }

std::optional<Vec6> safe_log(const Pose& e) {
  try {
    return log_se3_vec(e);
  } catch (const BranchError&) {
    return make_vec6(NAN, NAN, NAN, NAN, NAN, NAN);
  }
}

double safe_distance(const Pose& a, const Pose& b) {
  try {
    return geodesic_distance(a, b);
  } catch (const BranchError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

std::vector<Vec6> track_derivatives(int order, int frames, double frame_interval, double amplitude,
                                    double v0_scale) {
  const Vec6 directions[] = {
      make_vec6(0.01, 0.01, -0.01, 0.2, -0.1, 0.3),
      make_vec6(-0.01, 0.005, 0.01, -0.2, 0.15, -0.3),
      make_vec6(0.01, -0.01, 0.005, 0.15, 0.2, 0.3),
  };
  std::vector<Vec6> d;
  if (order < 1) return d;
  d.push_back(v0_scale * make_vec6(0.01, -0.015, 0.005, 0.05, 0.02, 0.5));
  // v_1(t) = v0 + sum_i amplitude * a_i (t / T)^(i-1)
  const double span = frames * frame_interval;
  double factorial = 1.0;
  for (int i = 2; i <= order; ++i) {
    factorial *= (i - 1);
    const Vec6& a = directions[std::min(i - 2, 2)];
    d.push_back(amplitude * a * factorial / std::pow(span, i - 1));
  }
  return d;
}

Track make_track(const ExperimentConfig& cfg) { return make_track(cfg, cfg.track_order); }

Track make_track(const ExperimentConfig& cfg, int track_order) {
  if (!cfg.track_file.empty()) return load_pose_file(cfg.track_file, cfg.frame_interval);
  TrackSpec spec;
  spec.order = track_order;
  spec.frames = cfg.frames;
  spec.frame_interval = cfg.frame_interval;
  spec.derivatives = track_derivatives(track_order, cfg.frames, cfg.frame_interval, cfg.amplitude, cfg.v0_scale);
  return generate_track(spec);
}

std::vector<Frame> make_frames(const Track& track, const ExperimentConfig& cfg, int n, const NoiseModel& noise,
                               std::uint64_t seed) {
  Rng rng(seed);
  return simulate_frames(track, n, Frustum{}, noise, (cfg.q_scale / n) * Mat2::Identity(), rng);
}

FilterRun run_mef(const FilterState& initial, const std::vector<Frame>& frames, const FilterConfig& cfg) {
  cfg.validate();
  FilterRun run;
  run.states.reserve(frames.size() + 1);
  run.states.push_back(initial);
  FilterState s = initial;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    try {
      for (int k = 0; k < cfg.steps_per_frame; ++k) s = mef_step(s, frames[l], cfg);
    } catch (const Error& e) {
      run.ok = false;
      run.failed_frame = static_cast<int>(l) + 1;
      run.failure = e.what();
      return run;
    }
    run.states.push_back(s);
  }
  return run;
}

ErrorSummary mean_errors(const Track& track, const std::vector<FilterState>& est) {
  ErrorSummary sum;
  const std::size_t count = std::min(est.size(), track.size());
  for (std::size_t l = 1; l < count; ++l) {
    const Pose gt = track.relative(l);
    sum.geodesic += geodesic_distance(gt, est[l].g.pose);
    sum.rotation_deg += rotation_error_deg(gt, est[l].g.pose);
    sum.translation += translation_error(gt, est[l].g.pose);
    ++sum.frames;
  }
  if (sum.frames > 0) {
    sum.geodesic /= sum.frames;
    sum.rotation_deg /= sum.frames;
    sum.translation /= sum.frames;
  }
  return sum;
}

CellResult run_cell(const ExperimentConfig& cfg, const Track& track, const CellSpec& spec) {
  CellResult res;
  res.spec = spec;
  res.repeats = cfg.repeats;
  FilterConfig fc = cfg.filter_config(spec.order);
  fc.alpha = spec.alpha;
  std::string failures;
  for (int r = 0; r < cfg.repeats; ++r) {
    try {
      const auto frames = make_frames(track, cfg, spec.n, spec.noise, cfg.seed + static_cast<std::uint64_t>(r));
      const FilterRun run = run_mef(FilterState::initial(spec.order), frames, fc);
      if (!run.ok) {
        failures += "repeat " + std::to_string(r) + " frame " + std::to_string(run.failed_frame) + ": " +
                    run.failure + "; ";
        continue;
      }
      const ErrorSummary e = mean_errors(track, run.states);
      res.mean.geodesic += e.geodesic;
      res.mean.rotation_deg += e.rotation_deg;
      res.mean.translation += e.translation;
      res.mean.frames += e.frames;
      res.repeat_means.push_back(e.geodesic);
      ++res.ok_repeats;
    } catch (const std::exception& e) {
      failures += "repeat " + std::to_string(r) + ": " + e.what() + "; ";
    }
  }
  if (res.ok_repeats > 0) {
    res.mean.geodesic /= res.ok_repeats;
    res.mean.rotation_deg /= res.ok_repeats;
    res.mean.translation /= res.ok_repeats;
  } else {
    res.mean.geodesic = res.mean.rotation_deg = res.mean.translation = std::numeric_limits<double>::quiet_NaN();
  }
  if (failures.empty()) {
    res.status = "ok";
  } else {
    failures.resize(failures.size() - 2);
    res.status = "failed: " + failures;
  }
  return res;
}

std::vector<CellSpec> sweep_cells(const ExperimentConfig& cfg) {
  const std::vector<int> ns = cfg.sweep_n.empty() ? std::vector<int>{cfg.n_obs} : cfg.sweep_n;
  const std::vector<double> alphas = cfg.sweep_alpha.empty() ? std::vector<double>{cfg.alpha} : cfg.sweep_alpha;
  std::vector<CellSpec> cells;
  for (int m : cfg.sweep_orders) {
    for (const auto& noise : cfg.sweep_noise) {
      for (double var : cfg.sweep_variances) {
        for (int n : ns) {
          for (double a : alphas) cells.push_back({m, NoiseModel::parse(noise, var), n, a});
        }
      }
    }
  }
  return cells;
}

std::vector<CellResult> run_sweep(const ExperimentConfig& cfg, const Track& track) {
  const auto cells = sweep_cells(cfg);
  std::vector<CellResult> results(cells.size());
  unsigned workers = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(cells.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_cell(cfg, track, cells[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return results;
}

CompareResult run_compare(const ExperimentConfig& cfg) {
  Rng rng(cfg.seed);
  TrackSpec spec;
  spec.order = 1;
  spec.start = comparison_start();
  spec.derivatives = {Vec6::Zero()};
  spec.frames = cfg.compare_frames;
  spec.frame_interval = cfg.compare_interval;
  spec.substeps = cfg.compare_substeps;
  if (cfg.gt_noise > 0.0) spec.process_noise = cfg.gt_noise * MatX::Identity(12, 12);
  const Track gt = generate_track(spec, &rng);

  const bool linear = cfg.compare_observations == "linear";
  std::normal_distribution<double> normal(0.0, std::sqrt(cfg.ekf_obs_var));
  std::vector<Frame> frames;
  for (int l = 1; l <= cfg.compare_frames; ++l) {
    Frame f;
    if (linear) {
      f.linear_weight = cfg.mef_obs_weight * Mat4::Identity();
      for (int k = 0; k < 4; ++k) {
        LinearObservation o;
        o.a = Vec4::Unit(k);
        o.y = gt.poses[l].matrix() * o.a;
        for (int i = 0; i < 4; ++i) o.y(i) += normal(rng);
        f.linear.push_back(o);
      }
    } else {
      // The state itself plays the role of the camera motion between frames.
      const Scene scene = frustum_scene(Pose(), 4 * cfg.n_obs, Frustum{}, rng);
      f.points = observe_frame(Pose(), gt.poses[l], scene, cfg.n_obs, rng);
      for (auto& o : f.points) o.y += Vec2(normal(rng), normal(rng));
      f.point_weight = cfg.mef_obs_weight * Mat2::Identity();
    }
    frames.push_back(std::move(f));
  }

  const double step = cfg.compare_interval / cfg.compare_substeps;
  const GroupElement truth0(gt.poses[0], gt.velocities[0]);

  FilterConfig mc = FilterConfig::uniform(2, cfg.alpha, cfg.mef_s, cfg.mef_s, step);
  mc.steps_per_frame = cfg.compare_substeps;
  mc.psd_hessian = cfg.compare_psd_hessian;
  FilterState m0 = FilterState::initial(2);
  if (cfg.mef_init == "truth") m0.g = truth0;
  const FilterRun mef = run_mef(m0, frames, mc);

  EkfConfig ec;
  ec.S = cfg.ekf_s * Mat12::Identity();
  ec.point_cov = cfg.ekf_obs_var * Mat2::Identity();
  ec.linear_cov = cfg.ekf_obs_var * Mat4::Identity();
  ec.delta = step;
  ec.frame_interval = cfg.compare_interval;
  EkfState e0;
  if (cfg.ekf_init == "truth") e0.g = truth0;
  std::vector<EkfState> ekf{e0};
  CompareResult out;
  for (std::size_t l = 0; l < frames.size(); ++l) {
    try {
      ekf.push_back(ekf_update(ekf_propagate(ekf.back(), cfg.compare_interval, ec), frames[l], ec));
    } catch (const Error& e) {
      out.ekf_failure = "frame " + std::to_string(l + 1) + ": " + e.what();
      break;
    }
  }
  if (!mef.ok) out.mef_failure = "frame " + std::to_string(mef.failed_frame) + ": " + mef.failure;

  for (std::size_t l = 0; l < gt.size(); ++l) {
    CompareRow row;
    row.t = gt.times[l];
    row.gt = *safe_log(gt.poses[l]);
    if (l < mef.states.size()) {
      row.mef = safe_log(mef.states[l].g.pose);
      row.mef_error = safe_distance(gt.poses[l], mef.states[l].g.pose);
    }
    if (l < ekf.size()) {
      row.ekf = safe_log(ekf[l].g.pose);
      row.ekf_error = safe_distance(gt.poses[l], ekf[l].g.pose);
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace mefse3::app
