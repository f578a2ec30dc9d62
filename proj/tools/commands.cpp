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


#include "commands.hpp"

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "experiments.hpp"
#include "mefse3/errors.hpp"
#include "mefse3/io.hpp"

namespace mefse3::app {
namespace {

// Shortest round-trip representation; NaN as "nan".
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

class CsvOut {
 public:
  explicit CsvOut(const std::string& path) {
    if (path == "-") {
      out_ = &std::cout;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error("cannot open output file '" + path + "'");
      out_ = file_.get();
    }
  }

  void comment(const std::string& text) { *out_ << text << '\n'; }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) *out_ << (i ? "," : "") << quote(cells[i]);
    *out_ << '\n';
  }

  void flush() {
    out_->flush();
    if (!*out_) throw Error("failed writing output");
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_ = nullptr;
};

void append_pose(std::vector<std::string>& row, const Pose& e) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) row.push_back(num(e.matrix()(i, j)));
  }
}

void append_pose_header(std::vector<std::string>& row, const std::string& prefix) {
  for (int i = 1; i <= 3; ++i) {
    for (int j = 1; j <= 4; ++j) row.push_back(prefix + std::to_string(i) + std::to_string(j));
  }
}

void append_vec6(std::vector<std::string>& row, const std::optional<Vec6>& v) {
  for (int i = 0; i < 6; ++i) row.push_back(v ? num((*v)(i)) : "");
}

void append_vec6_header(std::vector<std::string>& row, const std::string& prefix) {
  for (const char* c : {"w1", "w2", "w3", "t1", "t2", "t3"}) row.push_back(prefix + c);
}

}  // namespace

void cmd_simulate(const ExperimentConfig& cfg) {
  if (!cfg.track_file.empty()) spdlog::info("simulating observations along '{}'", cfg.track_file);
  const Track track = make_track(cfg);
  const auto frames = make_frames(track, cfg, cfg.n_obs, cfg.noise_model(), cfg.seed);
  save_pose_file(track.poses, cfg.track_out);
  save_observations(frames, cfg.obs_out);
  spdlog::info("wrote {} poses to '{}' and {} frames to '{}'", track.size(), cfg.track_out, frames.size(),
               cfg.obs_out);
}

bool cmd_filter(const ExperimentConfig& cfg) {
  if (cfg.observations.empty()) throw ConfigError("filter needs an observation file (key 'observations')");
  auto frames = load_observations(cfg.observations);
  // The file carries raw measurements only; weights come from the config.
  for (auto& f : frames) f.point_weight = cfg.point_weight();
  std::optional<Track> truth;
  if (!cfg.track_file.empty()) {
    truth = load_pose_file(cfg.track_file, cfg.frame_interval);
    if (truth->size() != frames.size() + 1) {
      spdlog::warn("track has {} poses for {} frames; errors only where both exist", truth->size(), frames.size());
    }
  }
  const FilterConfig fc = cfg.filter_config();
  const FilterRun run = run_mef(FilterState::initial(fc.order), frames, fc);

  CsvOut out(cfg.output);
  out.comment(std::string(kResultsSchema) + " filter");
  std::vector<std::string> header{"frame", "t"};
  append_pose_header(header, "rel_");
  append_pose_header(header, "acc_");
  for (const char* c : {"geodesic_error", "rotation_error_deg", "translation_error"}) header.push_back(c);
  out.row(header);
  Pose acc = truth ? truth->poses[0] : Pose();
  for (std::size_t l = 1; l < run.states.size(); ++l) {
    const Pose& rel = run.states[l].g.pose;
    acc = acc * rel;
    std::vector<std::string> row{std::to_string(l), num(run.states[l].t)};
    append_pose(row, rel);
    append_pose(row, acc);
    if (truth && l < truth->size()) {
      const Pose gt = truth->relative(l);
      double geo = NAN;
      try {
        geo = geodesic_distance(gt, rel);
      } catch (const BranchError&) {
      }
      row.push_back(num(geo));
      row.push_back(num(rotation_error_deg(gt, rel)));
      row.push_back(num(translation_error(gt, rel)));
    } else {
      row.insert(row.end(), 3, "");
    }
    out.row(row);
  }
  out.flush();
  if (!run.ok) {
    spdlog::error("filter failed at frame {}: {}", run.failed_frame, run.failure);
    return false;
  }
  return true;
}

void cmd_sweep(const ExperimentConfig& cfg) {
  const auto cells = sweep_cells(cfg);
  if (cells.empty()) throw ConfigError("sweep grid is empty");
  const Track track = make_track(cfg);
  spdlog::info("sweeping {} cells x {} repeats", cells.size(), cfg.repeats);
  const auto results = run_sweep(cfg, track);

  CsvOut out(cfg.output);
  out.comment(std::string(kResultsSchema) + " sweep");
  out.row({"order", "noise", "variance", "n_obs", "alpha", "repeats", "ok_repeats", "mean_geodesic_error",
           "mean_rotation_error_deg", "mean_translation_error", "status"});
  for (const auto& r : results) {
    out.row({std::to_string(r.spec.order), r.spec.noise.name(), num(r.spec.noise.variance), std::to_string(r.spec.n),
             num(r.spec.alpha), std::to_string(r.repeats), std::to_string(r.ok_repeats), num(r.mean.geodesic),
             num(r.mean.rotation_deg), num(r.mean.translation), r.status});
    if (r.ok_repeats < r.repeats) spdlog::warn("cell order={} {}: {}", r.spec.order, r.spec.noise.name(), r.status);
  }
  out.flush();
}

void cmd_compare_ekf(const ExperimentConfig& cfg) {
  const CompareResult res = run_compare(cfg);
  CsvOut out(cfg.output);
  out.comment(std::string(kResultsSchema) + " compare-ekf");
  if (!res.mef_failure.empty()) out.comment("# mef failed at " + res.mef_failure);
  if (!res.ekf_failure.empty()) out.comment("# ekf failed at " + res.ekf_failure);
  std::vector<std::string> header{"frame", "t"};
  append_vec6_header(header, "gt_");
  append_vec6_header(header, "mef_");
  append_vec6_header(header, "ekf_");
  header.push_back("mef_geodesic_error");
  header.push_back("ekf_geodesic_error");
  out.row(header);
  for (std::size_t l = 0; l < res.rows.size(); ++l) {
    const auto& r = res.rows[l];
    std::vector<std::string> row{std::to_string(l), num(r.t)};
    append_vec6(row, r.gt);
    append_vec6(row, r.mef);
    append_vec6(row, r.ekf);
    row.push_back(r.mef ? num(r.mef_error) : "");
    row.push_back(r.ekf ? num(r.ekf_error) : "");
    out.row(row);
  }
  out.flush();
  if (!res.mef_failure.empty()) spdlog::warn("MEF failed at {}", res.mef_failure);
  if (!res.ekf_failure.empty()) spdlog::warn("EKF failed at {}", res.ekf_failure);
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Minimum energy filtering on SE(3): synthetic benchmarks and baselines", "mefse3_cli"};
  app.require_subcommand(1);
  std::string config_path;
  bool verbose = false;
  bool quiet = false;
  bool print_config = false;
  app.add_option("-c,--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "errors only");
  app.add_flag("--print-config", print_config, "print the effective configuration to stderr");

  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> options;
  for (const auto& [key, entry] : config_keys()) {
    options[key] = app.add_option("--" + key, overrides[key], "override '" + key + "'")->group("Configuration");
  }
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"simulate", "generate a track and its observations"},
      {"filter", "run the minimum energy filter on an observation file"},
      {"sweep", "run a grid of filter orders, noise levels, n and alpha"},
      {"compare-ekf", "run the minimum energy filter and the EKF on the same stream"},
  };
  // Options may follow the subcommand name.
  app.fallthrough();
  for (const auto& s : subs) app.add_subcommand(s.name, s.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  spdlog::set_level(quiet ? spdlog::level::err : verbose ? spdlog::level::debug : spdlog::level::info);

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) load_config_file(config_path, cfg);
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) set_key(cfg, key, overrides[key]);
    }
    cfg.validate();
  } catch (const Error& e) {
    spdlog::error("configuration error: {}", e.what());
    return 2;
  }
  if (print_config) std::cerr << dump_config(cfg);

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "simulate") {
      cmd_simulate(cfg);
    } else if (cmd == "filter") {
      if (!cmd_filter(cfg)) return 1;
    } else if (cmd == "sweep") {
      cmd_sweep(cfg);
    } else {
      cmd_compare_ekf(cfg);
    }
  } catch (const ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}

}  // namespace mefse3::app
