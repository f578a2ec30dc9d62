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
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "mefse3/errors.hpp"
#include "mefse3/io.hpp"

namespace mefse3::app {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("mefse3_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static int run(std::vector<std::string> args) {
    args.insert(args.begin(), "mefse3_cli");
    args.push_back("-q");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  }

  static std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }

  // Data rows of a results CSV, split into cells.
  static std::vector<std::vector<std::string>> rows(const std::string& p) {
    std::ifstream f(p);
    std::vector<std::vector<std::string>> out;
    std::string line;
    bool header = false;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header) {
        header = true;
        continue;
      }
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) cells.push_back(c);
      if (!line.empty() && line.back() == ',') cells.push_back("");
      out.push_back(cells);
    }
    return out;
  }

  fs::path dir_;
};

TEST(Config, DefaultsValidate) { EXPECT_NO_THROW(ExperimentConfig{}.validate()); }

TEST(Config, SetKeyParsesTypes) {
  ExperimentConfig c;
  set_key(c, "order", "3");
  set_key(c, "alpha", "0.5");
  set_key(c, "psd_hessian", "true");
  set_key(c, "sweep_orders", "1,4");
  set_key(c, "sweep_noise", "AG, MG");
  set_key(c, "seed", "42");
  EXPECT_EQ(c.order, 3);
  EXPECT_EQ(c.alpha, 0.5);
  EXPECT_TRUE(c.psd_hessian);
  EXPECT_EQ(c.sweep_orders, (std::vector<int>{1, 4}));
  EXPECT_EQ(c.sweep_noise, (std::vector<std::string>{"AG", "MG"}));
  EXPECT_EQ(c.seed, 42u);
  EXPECT_THROW(set_key(c, "order", "two"), ConfigError);
  EXPECT_THROW(set_key(c, "order", "2.5"), ConfigError);
  EXPECT_THROW(set_key(c, "no_such_key", "1"), ConfigError);
}

TEST(Config, ReadReportsLineNumbers) {
  ExperimentConfig c;
  std::stringstream ok("# comment\norder = 4\n\nnoise = MU  # trailing\nnoise_var=0.01\n");
  read_config(ok, c);
  EXPECT_EQ(c.order, 4);
  EXPECT_EQ(c.noise, "MU");
  EXPECT_EQ(c.noise_var, 0.01);
  std::stringstream bad("order = 2\nalpha\n");
  try {
    read_config(bad, c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Config, DumpRoundTrips) {
  ExperimentConfig c;
  set_key(c, "delta", "0.0123");
  set_key(c, "sweep_variances", "0.001,1");
  set_key(c, "compare_observations", "projective");
  std::stringstream ss(dump_config(c));
  ExperimentConfig d;
  read_config(ss, d);
  EXPECT_EQ(dump_config(c), dump_config(d));
  for (const auto& [key, k] : config_keys()) EXPECT_EQ(k.get(c), k.get(d)) << key;
}

TEST(Config, ValidationRejectsBadValues) {
  auto bad = [](const char* key, const char* value) {
    ExperimentConfig c;
    set_key(c, key, value);
    EXPECT_THROW(c.validate(), ConfigError) << key << "=" << value;
  };
  bad("order", "0");
  bad("delta", "-1");
  bad("n_obs", "1");
  bad("noise", "XX");
  bad("noise_var", "-0.1");
  bad("q_scale", "0");
  bad("observations", "/nonexistent/obs.csv");
  bad("compare_observations", "sonar");
}

TEST(Config, DerivedFilterSettings) {
  ExperimentConfig c;
  c.order = 3;
  c.s_velocity_scale = 0.25;
  const FilterConfig f = c.filter_config();
  EXPECT_EQ(f.order, 3);
  EXPECT_EQ(c.filter_config(1).order, 1);
  EXPECT_EQ(c.point_weight(), (0.1 / 50) * Mat2::Identity());
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_EQ(run({"simulate", "--no_such_key", "1"}), 2);
  EXPECT_EQ(run({"-c", path("missing.cfg"), "simulate"}), 2);
  EXPECT_EQ(run({"filter"}), 2);
  EXPECT_EQ(run({"simulate", "--order", "0"}), 2);
  EXPECT_NE(run({}), 0);
}

TEST_F(CliTest, SimulateIsDeterministic) {
  for (const char* tag : {"a", "b"}) {
    ASSERT_EQ(run({"simulate", "--frames", "5", "--n_obs", "10", "--noise", "AG", "--noise_var", "1e-4", "--seed",
                   "9", "--track_out", path(std::string(tag) + ".txt"), "--obs_out",
                   path(std::string(tag) + ".csv")}),
              0);
  }
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  ASSERT_EQ(run({"simulate", "--frames", "5", "--n_obs", "10", "--noise", "AG", "--noise_var", "1e-4", "--seed",
                 "10", "--track_out", path("c.txt"), "--obs_out", path("c.csv")}),
            0);
  EXPECT_NE(slurp(path("a.csv")), slurp(path("c.csv")));
  EXPECT_EQ(load_pose_file(path("a.txt")).size(), 6u);
  EXPECT_EQ(load_observations(path("a.csv")).size(), 5u);
}

TEST_F(CliTest, ConfigFileAndFlagsCombine) {
  {
    std::ofstream f(path("run.cfg"));
    f << "frames = 4\nn_obs = 8\nobs_out = " << path("o.csv") << "\ntrack_out = " << path("t.txt") << "\n";
  }
  ASSERT_EQ(run({"-c", path("run.cfg"), "simulate", "--frames", "3"}), 0);
  EXPECT_EQ(load_observations(path("o.csv")).size(), 3u);
  EXPECT_EQ(load_observations(path("o.csv"))[0].points.size(), 8u);
}

TEST_F(CliTest, FilterWithoutTruthLeavesErrorsEmpty) {
  ASSERT_EQ(run({"simulate", "--frames", "4", "--n_obs", "10", "--track_out", path("t.txt"), "--obs_out",
                 path("o.csv")}),
            0);
  ASSERT_EQ(run({"filter", "--observations", path("o.csv"), "--n_obs", "10", "--output", path("r.csv")}), 0);
  const auto r = rows(path("r.csv"));
  ASSERT_EQ(r.size(), 4u);
  for (const auto& row : r) {
    ASSERT_EQ(row.size(), 2u + 24u + 3u);
    EXPECT_EQ(row[26], "");
    EXPECT_EQ(row[28], "");
  }
  EXPECT_EQ(slurp(path("r.csv")).rfind(kResultsSchema, 0), 0u);
}

TEST_F(CliTest, SingleCellSweepMatchesFilter) {
  const std::vector<std::string> common{"--frames", "6", "--n_obs", "15", "--order", "2", "--track_order", "2",
                                        "--noise", "MG", "--noise_var", "1e-3", "--seed", "4"};
  auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
    head.insert(head.end(), common.begin(), common.end());
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  ASSERT_EQ(run(with({"simulate"}, {"--track_out", path("t.txt"), "--obs_out", path("o.csv")})), 0);
  ASSERT_EQ(run(with({"filter"}, {"--observations", path("o.csv"), "--track_file", path("t.txt"), "--output",
                                  path("f.csv")})),
            0);
  ASSERT_EQ(run(with({"sweep"}, {"--sweep_orders", "2", "--sweep_noise", "MG", "--sweep_variances", "1e-3",
                                 "--output", path("s.csv")})),
            0);
  const auto f = rows(path("f.csv"));
  ASSERT_EQ(f.size(), 6u);
  double mean = 0.0;
  for (const auto& row : f) mean += std::stod(row[26]);
  mean /= f.size();
  const auto s = rows(path("s.csv"));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0][10], "ok");
  EXPECT_NEAR(std::stod(s[0][7]), mean, 1e-9 * std::max(1.0, mean));
}

TEST(Experiments, RepeatsAverageIndividualRuns) {
  ExperimentConfig c;
  c.frames = 5;
  c.n_obs = 12;
  c.repeats = 3;
  c.seed = 20;
  const Track track = make_track(c);
  CellSpec spec;
  spec.order = 2;
  spec.noise = NoiseModel::parse("AG", 1e-4);
  spec.n = 12;
  spec.alpha = c.alpha;
  const CellResult cell = run_cell(c, track, spec);
  ASSERT_EQ(cell.ok_repeats, 3);
  double manual = 0.0;
  for (int r = 0; r < 3; ++r) {
    const auto frames = make_frames(track, c, 12, spec.noise, c.seed + r);
    const FilterRun run = run_mef(FilterState::initial(2), frames, c.filter_config(2));
    ASSERT_TRUE(run.ok);
    manual += mean_errors(track, run.states).geodesic;
  }
  EXPECT_NEAR(cell.mean.geodesic, manual / 3, 1e-14);
  EXPECT_EQ(cell.repeat_means.size(), 3u);
}

TEST(Experiments, SweepKeepsGridOrder) {
  ExperimentConfig c;
  c.frames = 3;
  c.n_obs = 10;
  c.sweep_orders = {1, 2};
  c.sweep_noise = {"AG", "MU"};
  c.sweep_variances = {1e-4};
  c.threads = 3;
  const auto cells = sweep_cells(c);
  ASSERT_EQ(cells.size(), 4u);
  const auto results = run_sweep(c, make_track(c));
  ASSERT_EQ(results.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(results[i].spec.order, cells[i].order);
    EXPECT_EQ(results[i].spec.noise.name(), cells[i].noise.name());
  }
}

TEST(Experiments, GeneratedTrackDerivatives) {
  const auto d = track_derivatives(3, 100, 1.0, 2.0, 0.5);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_NEAR(d[0](5), 0.25, 1e-15);
  EXPECT_NEAR(d[1](3), 2.0 * 0.2 / 100.0, 1e-15);
  EXPECT_NEAR(d[2](3), 2.0 * -0.2 * 2.0 / 1e4, 1e-15);
}

TEST(Experiments, CompareFromTruthTracksLinearData) {
  ExperimentConfig c;
  c.compare_frames = 10;
  c.mef_init = "truth";
  c.ekf_init = "truth";
  c.gt_noise = 0.0;
  const CompareResult res = run_compare(c);
  EXPECT_TRUE(res.mef_failure.empty()) << res.mef_failure;
  EXPECT_TRUE(res.ekf_failure.empty()) << res.ekf_failure;
  ASSERT_EQ(res.rows.size(), 11u);
  for (std::size_t l = 1; l < res.rows.size(); ++l) {
    EXPECT_LT(res.rows[l].mef_error, 1e-2) << l;
    EXPECT_LT(res.rows[l].ekf_error, 1e-2) << l;
  }
}

TEST_F(CliTest, CompareWritesBothFilters) {
  ASSERT_EQ(run({"compare-ekf", "--compare_frames", "5", "--output", path("c.csv")}), 0);
  const auto r = rows(path("c.csv"));
  ASSERT_EQ(r.size(), 6u);
  EXPECT_EQ(r[0].size(), 2u + 3u * 6u + 2u);
}

}  // namespace
}  // namespace mefse3::app
