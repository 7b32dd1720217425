// Copyright 2026 The polpur Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polpur/config.hpp"
#include "polpur/runner.hpp"

namespace polpur {
namespace {

namespace fs = std::filesystem;

std::string column(const PointResult& p, const std::string& name) {
  for (const auto& [k, v] : p.columns) {
    if (k == name) return v;
  }
  return "<missing>";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("polpur_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args, const std::string& out = "out") {
    const std::string cmd = std::string(POLPUR_CLI) + " " + args + " --out-dir " + (dir_ / out).string() +
                            " > " + (dir_ / "stdout.txt").string() + " 2> " + (dir_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string config(const std::string& name) const { return std::string(POLPUR_CONFIG_DIR) + "/" + name; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

TEST(ExecutePoint, IdealPairVerifies) {
  const PointResult p = execute_point(parse_config("experiment = pair\nsource.alpha_sq = 0.3\ndetector.eta = 0.7\n"), true);
  EXPECT_TRUE(p.verify_applicable);
  EXPECT_TRUE(p.verified());
  EXPECT_EQ(column(p, "verified"), "true");
  EXPECT_EQ(p.columns.front().first, "alpha_sq");
}

TEST(ExecutePoint, CsvHeaderOrder) {
  const PointResult p = execute_point(parse_config("experiment = pair\n"), false);
  const std::string csv = to_csv({p});
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_EQ(header.rfind("alpha_sq,phase,detector,eta,nu,veto,postselect,nmax,", 0), 0u) << header;
  EXPECT_NE(header.find(",p,p_total,p_s,p_e,"), std::string::npos) << header;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(ExecutePoint, DarkBudgetNegligible) {
  const PointResult p = execute_point(
      parse_config("experiment = dark_budget\ndetector.kind = conventional\ndark.gamma_sq = 1e-4\ndark.nu = 1e-6\n"),
      false);
  EXPECT_EQ(column(p, "negligible"), "true");
}

TEST(ExecuteSweep, IndependentOfThreadCount) {
  const ExperimentConfig c = parse_config(
      "experiment = sweep\nsweep.base = pdc\nnmax = 4\nsource.phase_averaged = false\n"
      "sweep.axis = detector.eta 0.2 1 3\nsweep.values = source.gamma 0.05 0.1\n");
  const SweepResult one = execute_sweep(c, true, 1);
  const SweepResult four = execute_sweep(c, true, 4);
  ASSERT_EQ(one.points.size(), 6u);
  EXPECT_EQ(to_csv(one), to_csv(four));
  EXPECT_EQ(to_json(c, one).dump(), to_json(c, four).dump());
  for (const auto& p : one.points) EXPECT_TRUE(p.verified());
}

TEST(ExecuteSweep, SampledPointsUseDistinctStreams) {
  const ExperimentConfig c = parse_config(
      "experiment = sweep\nsweep.base = channel\nsamples = 200\nsweep.values = channel.min_mag 0.3 0.3\n");
  const SweepResult s = execute_sweep(c, false, 2);
  ASSERT_EQ(s.points.size(), 2u);
  EXPECT_NE(s.points[0].result.dump(), s.points[1].result.dump());
  EXPECT_EQ(to_csv(s), to_csv(execute_sweep(c, false, 1)));
}

TEST_F(Cli, VerifyPairExitsZero) {
  EXPECT_EQ(run("verify " + config("pair.cfg")), 0) << slurp(dir_ / "stderr.txt");
  EXPECT_TRUE(fs::exists(dir_ / "out" / "pair.json"));
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("1/1 points agree"), std::string::npos);
}

TEST_F(Cli, BadConfigExitsTwo) {
  const fs::path bad = write("bad.cfg", "experiment = pair\ndetector.eta = 1.2\nfoo = 1\n");
  EXPECT_EQ(run("run " + bad.string()), 2);
  const std::string err = slurp(dir_ / "stderr.txt");
  EXPECT_NE(err.find("detector.eta = 1.2"), std::string::npos) << err;
  EXPECT_NE(err.find("unknown key 'foo'"), std::string::npos) << err;
}

TEST_F(Cli, SweepNeedsSweepConfig) {
  EXPECT_EQ(run("sweep " + config("pair.cfg")), 2);
}

TEST_F(Cli, VerifyGridWritesReferenceColumns) {
  ASSERT_EQ(run("run " + config("pair_grid.cfg") + " --verify"), 0) << slurp(dir_ / "stderr.txt");
  const std::string csv = slurp(dir_ / "out" / "pair_grid.csv");
  const std::string header = csv.substr(0, csv.find('\n'));
  EXPECT_NE(header.find(",ref_p,ref_p_s,ref_p_e,ref_fidelity,max_abs_diff,verified"), std::string::npos) << header;
  EXPECT_EQ(csv.find(",false\n"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("100/100 points agree"), std::string::npos);
}

TEST_F(Cli, UnwritableOutputExitsThree) {
  write("blocker", "x");
  EXPECT_EQ(run("run " + config("pair.cfg"), "blocker/sub"), 3);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  ASSERT_EQ(run("sweep " + config("pair_grid.cfg") + " --threads 3", "a"), 0);
  ASSERT_EQ(run("sweep " + config("pair_grid.cfg") + " --threads 1", "b"), 0);
  const std::string a = slurp(dir_ / "a" / "pair_grid.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "pair_grid.csv"));
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 101);

  ASSERT_EQ(run("run " + config("channel.cfg"), "c"), 0);
  ASSERT_EQ(run("run " + config("channel.cfg"), "d"), 0);
  EXPECT_EQ(slurp(dir_ / "c" / "channel.json"), slurp(dir_ / "d" / "channel.json"));
}

TEST_F(Cli, FiberCaseDIsNotPurifiable) {
  ASSERT_EQ(run("verify " + config("fiber_d.cfg") + " --format csv"), 0) << slurp(dir_ / "stderr.txt");
  const std::string csv = slurp(dir_ / "out" / "fiber_d.csv");
  EXPECT_EQ(csv.substr(csv.size() - 12), ",false,true\n") << csv;
}

TEST_F(Cli, EnvironmentSelectsOutputDirectory) {
  const fs::path env_dir = dir_ / "env";
  const std::string cmd = "POLPUR_OUT_DIR=" + env_dir.string() + " " + POLPUR_CLI + " run -q " + config("dark.cfg");
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const std::string json = slurp(env_dir / "dark.json");
  EXPECT_NE(json.find("\"negligible\": true"), std::string::npos) << json;
}

}  // namespace
}  // namespace polpur
