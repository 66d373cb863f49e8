// Copyright 2026 The hllrt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "support/streams.hpp"

namespace hllrt::cli {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "hllrt");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hllrt-cli-" + std::to_string(::getpid()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::vector<std::string>& lines) const {
    std::ofstream f(path(name));
    for (const auto& l : lines) f << l << '\n';
  }

  fs::path dir_;
};

TEST_F(CliTest, AttackWritesSetAndReport) {
  const auto r = run({"attack", "--registers", "4096", "--cardinality", "100000", "--seed", "7", "--out",
                      path("v.txt")});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  const auto set = load_attack_set(path("v.txt"));
  EXPECT_GE(set.size(), 4000u);
  EXPECT_LE(set.size(), 4200u);
  EXPECT_EQ(report.at("set_size"), set.size());
  EXPECT_NEAR(report.at("verify_estimate").get<double>(), 100000.0, 3000.0);
  EXPECT_EQ(report.at("phases").size(), 3u);
  EXPECT_LE(report.at("total_insertions").get<std::uint64_t>(), 300000u);

  const auto v = run({"verify", path("v.txt"), "--format", "json"});
  ASSERT_EQ(v.code, kOk) << v.err;
  const auto vj = nlohmann::json::parse(v.out);
  EXPECT_NEAR(vj.at("inflation_factor").get<double>(), 100000.0 / 4096, 1.5);
}

TEST_F(CliTest, AttackOfOne) {
  const auto r = run({"attack", "--cardinality", "1", "--out", path("one.txt"), "--report", path("r.json")});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(load_attack_set(path("one.txt")).size(), 1u);
  EXPECT_TRUE(fs::exists(path("r.json")));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, kUsage);
  EXPECT_EQ(run({"attack", "--cardinality", "0"}).code, kUsage);
  EXPECT_EQ(run({"attack", "--registers", "1000", "--cardinality", "10"}).code, kUsage);
  EXPECT_EQ(run({"detect", path("missing.txt"), "--mode", "sns"}).code, kUsage);
  EXPECT_EQ(run({"detect", path("x"), "--mode", "other"}).code, kUsage);
  const auto bad = run({"analyze", "nonsense"});
  EXPECT_EQ(bad.code, kUsage);
  EXPECT_NE(bad.err.find("missed"), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, kOk);
}

TEST_F(CliTest, TargetErrors) {
  const auto r = run({"attack", "--target", "redis://127.0.0.1:1/k", "--cardinality", "10", "--out", path("v.txt")});
  EXPECT_EQ(r.code, kTarget);
}

TEST_F(CliTest, VerifyEmptyAndDuplicate) {
  write("empty.txt", {});
  const auto e = run({"verify", path("empty.txt")});
  ASSERT_EQ(e.code, kOk) << e.err;
  EXPECT_NE(e.out.find("estimate 0"), std::string::npos);

  write("dup.txt", {"a", "b", "a"});
  const auto d = run({"verify", path("dup.txt")});
  EXPECT_EQ(d.code, kUsage);
  EXPECT_NE(d.err.find("line 3"), std::string::npos);
  EXPECT_NE(d.err.find("'a'"), std::string::npos);
}

TEST_F(CliTest, DetectHonestAndAttack) {
  write("honest.txt", hllrt::testing::random_stream(3, 20000));
  const auto h = run({"detect", path("honest.txt"), "--mode", "sns", "--registers", "1024", "--shadow-salt", "77"});
  EXPECT_EQ(h.code, kOk) << h.out;
  EXPECT_EQ(nlohmann::json::parse(h.out).at("alarm"), false);

  ASSERT_EQ(run({"attack", "--registers", "1024", "--cardinality", "20480", "--out", path("v.txt")}).code, kOk);
  const auto s = run({"detect", path("v.txt"), "--mode", "sns", "--registers", "1024"});
  EXPECT_EQ(s.code, kAlarm);
  EXPECT_EQ(nlohmann::json::parse(s.out).at("alarm"), true);

  const auto st = run({"detect", path("v.txt"), "--mode", "stats", "--registers", "1024"});
  EXPECT_EQ(st.code, kAlarm);
  EXPECT_EQ(nlohmann::json::parse(st.out).at("change_fraction"), 1.0);
}

TEST_F(CliTest, ExperimentCsvAndPlotData) {
  const auto r = run({"experiment", "--registers", "256", "--cardinalities", "2000,3000", "--seeds", "1,2", "--out",
                      path("e.csv"), "--plot-data", path("plot.csv")});
  ASSERT_EQ(r.code, kOk) << r.err;
  std::ifstream f(path("e.csv"));
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "R,C,seed,phase,set_size,estimate,insertions,wall_time_ms");
  int rows = 0;
  for (std::string line; std::getline(f, line);) ++rows;
  EXPECT_EQ(rows, 12);
  EXPECT_TRUE(fs::exists(path("plot.csv")));

  const auto j = run({"experiment", "--registers", "256", "--cardinality", "1000", "--format", "json"});
  ASSERT_EQ(j.code, kOk) << j.err;
  EXPECT_EQ(nlohmann::json::parse(j.out).size(), 3u);
}

TEST_F(CliTest, Analyze) {
  auto value = [](const CliRun& r) { return nlohmann::json::parse(r.out).at("value").get<double>(); };
  EXPECT_NEAR(value(run({"analyze", "missed", "--registers", "4096", "--n", "1000000"})), 25.2, 0.1);
  EXPECT_NEAR(value(run({"analyze", "threshold", "--registers", "4096", "--estimate", "20000"})), 0.015, 0.002);
  EXPECT_EQ(value(run({"analyze", "zdelta", "--old", "3", "--new", "3"})), 0.0);
  EXPECT_EQ(run({"analyze", "missed", "--registers", "4096"}).code, kUsage);
}

}  // namespace
}  // namespace hllrt::cli
