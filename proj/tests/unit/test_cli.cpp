#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "trgnss_cli/commands.hpp"

namespace fs = std::filesystem;
using namespace trgnss::cli;

namespace {

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("trgnss_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    std::ofstream(dir_ / "short.json") << R"({"scenario": {"duration": 40, "seed": 3}})";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SimulateSolveEvaluate) {
  CliRun sim = run_cli({"simulate", "--config", path("short.json"), "--out", path("sim")});
  ASSERT_EQ(sim.code, kExitOk) << sim.err;
  for (const char* f : {"obs.rnx", "truth.csv", "sat_states.csv"}) EXPECT_TRUE(fs::exists(dir_ / "sim" / f)) << f;

  CliRun solve = run_cli({"solve", "--obs", path("sim/obs.rnx"), "--sat-states", path("sim/sat_states.csv"), "--out",
                       path("sol")});
  ASSERT_EQ(solve.code, kExitOk) << solve.err;
  EXPECT_TRUE(fs::exists(dir_ / "sol" / "graph.json"));
  const std::string log = slurp(dir_ / "sol" / "solve.log");
  EXPECT_NE(log.find("method: TR-RTK"), std::string::npos);
  EXPECT_NE(log.find("trrtk histogram"), std::string::npos);

  CliRun eval = run_cli({"evaluate", "--est", path("sol/trajectory.csv"), "--truth", path("sim/truth.csv"), "--json"});
  ASSERT_EQ(eval.code, kExitOk) << eval.err;
  EXPECT_NE(eval.out.find("\"rpe_mean\""), std::string::npos);

  CliRun inspect = run_cli({"inspect", "--graph", path("sol/graph.json")});
  ASSERT_EQ(inspect.code, kExitOk) << inspect.err;
  EXPECT_NE(inspect.out.find("nodes: 41"), std::string::npos);
  EXPECT_NE(inspect.out.find("edges velocity: 40"), std::string::npos);
}

TEST_F(CliTest, NoTrRtkLabelAndNoEdges) {
  ASSERT_EQ(run_cli({"simulate", "--config", path("short.json"), "--out", path("sim")}).code, kExitOk);
  CliRun solve = run_cli({"solve", "--obs", path("sim/obs.rnx"), "--sat-states", path("sim/sat_states.csv"), "--out",
                       path("sol"), "--no-trrtk"});
  ASSERT_EQ(solve.code, kExitOk) << solve.err;
  EXPECT_NE(solve.out.find("method: w/o TR-RTK"), std::string::npos);
  CliRun inspect = run_cli({"inspect", "--graph", path("sol/graph.json")});
  EXPECT_EQ(inspect.out.find("edges trrtk"), std::string::npos);
  CliRun eval = run_cli({"evaluate", "--est", path("sol/trajectory.csv"), "--truth", path("sim/truth.csv"), "--label",
                      "w/o TR-RTK"});
  ASSERT_EQ(eval.code, kExitOk);
  EXPECT_NE(eval.out.find("w/o TR-RTK"), std::string::npos);
}

TEST_F(CliTest, MismatchedLengthsExitTwo) {
  ASSERT_EQ(run_cli({"simulate", "--config", path("short.json"), "--out", path("sim")}).code, kExitOk);
  std::ofstream(path("short_truth.csv")) << "tow,x,y,z,lat_deg,lon_deg,height,status\n"
                                         << "345600.000,1,2,3,0,0,0,truth\n";
  CliRun eval = run_cli({"evaluate", "--est", path("sim/truth.csv"), "--truth", path("short_truth.csv")});
  EXPECT_EQ(eval.code, kExitParse);
  EXPECT_NE(eval.err.find("LengthMismatch"), std::string::npos);
}

TEST_F(CliTest, Deterministic) {
  ASSERT_EQ(run_cli({"simulate", "--config", path("short.json"), "--out", path("a")}).code, kExitOk);
  ASSERT_EQ(run_cli({"simulate", "--config", path("short.json"), "--out", path("b")}).code, kExitOk);
  for (const char* f : {"obs.rnx", "truth.csv", "sat_states.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  for (const char* d : {"a", "b"}) {
    ASSERT_EQ(run_cli({"solve", "--obs", path(std::string(d) + "/obs.rnx"), "--sat-states",
                       path(std::string(d) + "/sat_states.csv"), "--out", path(std::string(d) + "/sol")})
                  .code,
              kExitOk);
  }
  for (const char* f : {"trajectory.csv", "graph.json", "solve.log"}) {
    EXPECT_EQ(slurp(dir_ / "a" / "sol" / f), slurp(dir_ / "b" / "sol" / f)) << f;
  }
}

TEST_F(CliTest, ErrorsAreStructured) {
  CliRun missing = run_cli({"solve", "--obs", path("nope.rnx"), "--sat-states", path("nope.csv"), "--out", path("x")});
  EXPECT_EQ(missing.code, kExitIo);
  EXPECT_NE(missing.err.find("IoFailure"), std::string::npos);

  std::ofstream(path("bad.json")) << R"({"scenario": {"bogus": 1}})";
  CliRun bad = run_cli({"simulate", "--config", path("bad.json"), "--out", path("sim")});
  EXPECT_EQ(bad.code, kExitParse);
  EXPECT_NE(bad.err.find("InvalidConfig"), std::string::npos);

  EXPECT_EQ(run_cli({"frobnicate"}).code, kExitParse);
  EXPECT_EQ(run_cli({}).code, kExitParse);
  EXPECT_EQ(run_cli({"--help"}).code, kExitOk);
}
