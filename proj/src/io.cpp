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

#include "mefse3/io.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "mefse3/errors.hpp"

namespace mefse3 {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t[0] == '#';
}

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

void put(std::ostream& out, double v) { out << std::setprecision(17) << v; }

Frame& frame_at(std::vector<Frame>& frames, long idx, int line) {
  if (idx < 1) throw ParseError("frame index must be >= 1", line);
  if (static_cast<std::size_t>(idx) > frames.size()) frames.resize(idx);
  return frames[idx - 1];
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  return f;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for reading");
  return f;
}

}  // namespace

Track read_poses(std::istream& in, double frame_interval) {
  Track t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    std::istringstream ss(line);
    Mat4 m = Mat4::Identity();
    for (int i = 0; i < 12; ++i) {
      if (!(ss >> m(i / 4, i % 4))) throw ParseError("expected 12 numbers", lineno);
    }
    std::string extra;
    if (ss >> extra) throw ParseError("trailing data '" + extra + "'", lineno);
    if (!m.allFinite()) throw ParseError("non-finite entry", lineno);
    const double dev = Pose::constraint_violation(m);
    if (dev > 1e-9) {
      if (dev > 1e-3) spdlog::warn("line {}: rotation off SO(3) by {:.3g}, re-orthonormalized", lineno, dev);
      m.topLeftCorner<3, 3>() = nearest_rotation(m.topLeftCorner<3, 3>());
    }
    t.times.push_back(static_cast<double>(t.poses.size()) * frame_interval);
    t.poses.push_back(Pose::from_matrix(m));
  }
  return t;
}

Track load_pose_file(const std::string& path, double frame_interval) {
  std::ifstream f = open_in(path);
  return read_poses(f, frame_interval);
}

void write_poses(std::ostream& out, const std::vector<Pose>& poses) {
  for (const auto& p : poses) {
    for (int i = 0; i < 12; ++i) {
      if (i) out << ' ';
      put(out, p.matrix()(i / 4, i % 4));
    }
    out << '\n';
  }
}

void save_pose_file(const std::vector<Pose>& poses, const std::string& path) {
  std::ofstream f = open_out(path);
  write_poses(f, poses);
}

void write_observations_csv(std::ostream& out, const std::vector<Frame>& frames) {
  out << kObservationSchema << '\n' << "frame,point_id,x1,x2,depth,y1,y2\n";
  for (std::size_t l = 0; l < frames.size(); ++l) {
    for (std::size_t k = 0; k < frames[l].points.size(); ++k) {
      const Observation& o = frames[l].points[k];
      out << l + 1 << ',' << k;
      for (double v : {o.pixel.x(), o.pixel.y(), o.depth, o.y.x(), o.y.y()}) {
        out << ',';
        put(out, v);
      }
      out << '\n';
    }
  }
  // Trailing empty frames would otherwise be lost.
  out << "# frames " << frames.size() << '\n';
}

std::vector<Frame> read_observations_csv(std::istream& in) {
  std::vector<Frame> frames;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.rfind("# frames ", 0) == 0) {
      const long n = std::stol(t.substr(9));
      if (n > static_cast<long>(frames.size())) frames.resize(n);
      continue;
    }
    if (skippable(line)) continue;
    if (!header) {
      if (t != "frame,point_id,x1,x2,depth,y1,y2") throw ParseError("unexpected header '" + t + "'", lineno);
      header = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (trim(cell.substr(used)) != "") throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("bad number '" + cell + "'", lineno);
      }
    }
    if (v.size() != 7) throw ParseError("expected 7 columns", lineno);
    Observation o;
    o.pixel = Vec2(v[2], v[3]);
    o.depth = v[4];
    o.y = Vec2(v[5], v[6]);
    if (!(o.depth > 0.0)) throw ParseError("depth must be positive", lineno);
    frame_at(frames, static_cast<long>(v[0]), lineno).points.push_back(o);
  }
  return frames;
}

void write_observations_jsonl(std::ostream& out, const std::vector<Frame>& frames) {
  for (std::size_t l = 0; l < frames.size(); ++l) {
    if (frames[l].points.empty()) {
      out << nlohmann::json{{"frame", l + 1}, {"empty", true}}.dump() << '\n';
    }
    for (std::size_t k = 0; k < frames[l].points.size(); ++k) {
      const Observation& o = frames[l].points[k];
      nlohmann::json j = {{"frame", l + 1},
                          {"point_id", k},
                          {"x", {o.pixel.x(), o.pixel.y()}},
                          {"depth", o.depth},
                          {"y", {o.y.x(), o.y.y()}}};
      out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) << '\n';
    }
  }
}

std::vector<Frame> read_observations_jsonl(std::istream& in) {
  std::vector<Frame> frames;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Frame& f = frame_at(frames, j.at("frame").get<long>(), lineno);
      if (j.value("empty", false)) continue;
      Observation o;
      o.pixel = Vec2(j.at("x").at(0).get<double>(), j.at("x").at(1).get<double>());
      o.depth = j.at("depth").get<double>();
      o.y = Vec2(j.at("y").at(0).get<double>(), j.at("y").at(1).get<double>());
      if (!(o.depth > 0.0)) throw ParseError("depth must be positive", lineno);
      f.points.push_back(o);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return frames;
}

void save_observations(const std::vector<Frame>& frames, const std::string& path) {
  std::ofstream f = open_out(path);
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") {
    write_observations_jsonl(f, frames);
  } else {
    write_observations_csv(f, frames);
  }
}

std::vector<Frame> load_observations(const std::string& path) {
  std::ifstream f = open_in(path);
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl") return read_observations_jsonl(f);
  return read_observations_csv(f);
}

}  // namespace mefse3
