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
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mefse3/errors.hpp"
#include "mefse3/io.hpp"
#include "test_support.hpp"

namespace mefse3 {
namespace {

std::vector<Frame> sample_frames() {
  std::vector<Frame> frames(4);
  testing::Rng rng(70);
  for (int l : {0, 2}) {
    for (int k = 0; k < 3; ++k) {
      Observation o;
      o.pixel = testing::random_vec(rng, 2) * 0.3;
      o.depth = 5.0 + k + 1.0 / 3.0;
      o.y = o.pixel + testing::random_vec(rng, 2) * 1e-2;
      frames[l].points.push_back(o);
    }
  }
  return frames;  // frames 2 and 4 stay empty
}

void expect_same(const std::vector<Frame>& a, const std::vector<Frame>& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t l = 0; l < a.size(); ++l) {
    ASSERT_EQ(a[l].points.size(), b[l].points.size()) << l;
    for (std::size_t k = 0; k < a[l].points.size(); ++k) {
      EXPECT_EQ(a[l].points[k].pixel, b[l].points[k].pixel);
      EXPECT_EQ(a[l].points[k].depth, b[l].points[k].depth);
      EXPECT_EQ(a[l].points[k].y, b[l].points[k].y);
    }
  }
}

TEST(PoseFiles, RoundTripIsExact) {
  testing::Rng rng(71);
  std::vector<Pose> poses;
  for (int i = 0; i < 5; ++i) poses.push_back(testing::random_pose(rng));
  std::stringstream ss;
  write_poses(ss, poses);
  const Track t = read_poses(ss, 0.5);
  ASSERT_EQ(t.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(t.poses[i].matrix(), poses[i].matrix());
    EXPECT_DOUBLE_EQ(t.times[i], 0.5 * i);
  }
}

TEST(PoseFiles, CommentsAndBlankLinesAreSkipped) {
  std::stringstream ss("# header\n\n1 0 0 0 0 1 0 0 0 0 1 2\n");
  const Track t = read_poses(ss);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.poses[0].translation(), Vec3(0, 0, 2));
}

TEST(PoseFiles, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    std::stringstream ss(text);
    try {
      read_poses(ss);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("1 0 0 0 0 1 0 0 0 0 1 0\n1 0 0\n"), 2);
  EXPECT_EQ(line_of("# c\n1 0 0 0 0 1 0 0 0 0 1 0 7\n"), 2);
  EXPECT_EQ(line_of("1 0 0 nan 0 1 0 0 0 0 1 0\n"), 1);
  EXPECT_EQ(line_of("1 0 0 x 0 1 0 0 0 0 1 0\n"), 1);
}

TEST(PoseFiles, SlightlyOffRotationsAreProjected) {
  Mat3 r = Eigen::AngleAxisd(0.3, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  r(0, 1) += 1e-6;
  std::stringstream ss;
  ss << std::setprecision(17);
  for (int i = 0; i < 3; ++i) ss << r(i, 0) << ' ' << r(i, 1) << ' ' << r(i, 2) << " 1 ";
  ss << '\n';
  const Track t = read_poses(ss);
  EXPECT_LT(Pose::constraint_violation(t.poses[0].matrix()), 1e-12);
  EXPECT_LT((t.poses[0].rotation() - r).norm(), 1e-5);
}

TEST(ObservationFiles, CsvRoundTripKeepsEmptyFrames) {
  const auto frames = sample_frames();
  std::stringstream ss;
  write_observations_csv(ss, frames);
  expect_same(read_observations_csv(ss), frames);
}

TEST(ObservationFiles, JsonlRoundTripKeepsEmptyFrames) {
  const auto frames = sample_frames();
  std::stringstream ss;
  write_observations_jsonl(ss, frames);
  expect_same(read_observations_jsonl(ss), frames);
}

TEST(ObservationFiles, CsvErrors) {
  const std::string head = std::string(kObservationSchema) + "\nframe,point_id,x1,x2,depth,y1,y2\n";
  auto line_of = [](const std::string& text) {
    std::stringstream ss(text);
    try {
      read_observations_csv(ss);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("frame,x\n"), 1);
  EXPECT_EQ(line_of(head + "1,0,0.1,0.2,5,0.1\n"), 3);
  EXPECT_EQ(line_of(head + "1,0,0.1,0.2,-5,0.1,0.2\n"), 3);
  EXPECT_EQ(line_of(head + "1,0,0.1,0.2,5,0.1,0.2\n0,0,0.1,0.2,5,0.1,0.2\n"), 4);
  EXPECT_EQ(line_of(head + "1,0,0.1,abc,5,0.1,0.2\n"), 3);
}

TEST(ObservationFiles, JsonlErrors) {
  std::stringstream bad("{\"frame\": 1, \"point_id\": 0}\n");
  EXPECT_THROW(read_observations_jsonl(bad), ParseError);
  std::stringstream garbage("\n{oops\n");
  try {
    read_observations_jsonl(garbage);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ObservationFiles, FormatFollowsExtension) {
  const auto dir = std::filesystem::temp_directory_path() / "mefse3_io_test";
  std::filesystem::create_directories(dir);
  const auto frames = sample_frames();
  for (const char* name : {"obs.csv", "obs.jsonl"}) {
    const std::string path = (dir / name).string();
    save_observations(frames, path);
    expect_same(load_observations(path), frames);
  }
  std::ifstream j((dir / "obs.jsonl").string());
  std::string first;
  std::getline(j, first);
  EXPECT_EQ(first.front(), '{');
  EXPECT_THROW(load_observations((dir / "missing.csv").string()), Error);
}

}  // namespace
}  // namespace mefse3
