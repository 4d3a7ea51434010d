#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "poseobs/io.hpp"

namespace fs = std::filesystem;

namespace {

const char* kCli = POSEOBS_CLI_PATH;

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "poseobs_cli_test";
  return dir;
}

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string(kCli) + " " + args;
  if (!stdout_file.empty()) cmd += " > " + stdout_file;
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const fs::path& p) {
  return poseobs::read_lines(p.string()).size();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    fs::remove_all(work_dir());
    fs::create_directories(work_dir());
  }
};

}  // namespace

TEST_F(CliTest, CheckGainsFeasibleTriple) {
  const fs::path out = work_dir() / "chk.json";
  ASSERT_EQ(run("check-gains --gains 10,40,2 --omega-bound 1 --json",
                out.string()),
            0);
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_TRUE(j["in_K"].get<bool>());
  EXPECT_GT(j["Y_min_eig"].get<double>(), 0.0);
  EXPECT_GT(j["Z_min_eig"].get<double>(), 0.0);
  EXPECT_TRUE(j["violated_conditions"].empty());
}

TEST_F(CliTest, CheckGainsReferenceTripleOutsideK) {
  const fs::path out = work_dir() / "chk2.json";
  ASSERT_EQ(run("check-gains --gains 3.4,5.5,1.3 --omega-bound 1 --json",
                out.string()),
            0);  // matrix inequalities still hold
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_FALSE(j["in_K"].get<bool>());
  EXPECT_TRUE(j["matrix_inequalities_hold"].get<bool>());
  bool found = false;
  for (const auto& v : j["violated_conditions"]) {
    if (v.get<std::string>() == "k3^2 - 2 k4 - 2 k5^2 > 0") found = true;
  }
  EXPECT_TRUE(found);

  EXPECT_EQ(run("check-gains --gains 0,0,0 --omega-bound 1 --json",
                (work_dir() / "chk3.json").string()),
            2);
}

TEST_F(CliTest, SimulateWritesTracesAndSummaries) {
  const fs::path out = work_dir() / "sim";
  std::ofstream cfg(work_dir() / "run.cfg");
  cfg << "t_end = 0.1\nsensor.noise = 0\n";
  cfg.close();
  ASSERT_EQ(run("simulate --config " + (work_dir() / "run.cfg").string() +
                " --out " + out.string()),
            0);
  EXPECT_TRUE(fs::exists(out / "trace_constant.csv"));
  EXPECT_TRUE(fs::exists(out / "trace_riccati.csv"));
  EXPECT_TRUE(fs::exists(out / "summary_constant.json"));
  EXPECT_TRUE(fs::exists(out / "summary_riccati.json"));
  // 100 steps -> header + 100 rows.
  EXPECT_EQ(count_lines(out / "trace_constant.csv"), 101u);
}

TEST_F(CliTest, SingleStepRunHasHeaderPlusOneRow) {
  const fs::path out = work_dir() / "one";
  std::ofstream cfg(work_dir() / "one.cfg");
  cfg << "t_end = 0.001\nsensor.noise = 0\nobserver = constant\n";
  cfg.close();
  ASSERT_EQ(run("simulate --config " + (work_dir() / "one.cfg").string() +
                " --out " + out.string()),
            0);
  EXPECT_EQ(count_lines(out / "trace_constant.csv"), 2u);
}

TEST_F(CliTest, SampledRunsAreByteIdenticalPerSeed) {
  std::ofstream cfg(work_dir() / "noisy.cfg");
  cfg << "t_end = 0.5\nsensor.noise = 0.01\nobserver = both\nemit_log = true\n";
  cfg.close();
  const std::string base = "simulate --config " +
                           (work_dir() / "noisy.cfg").string() + " --seed 42";
  ASSERT_EQ(run(base + " --out " + (work_dir() / "a").string()), 0);
  ASSERT_EQ(run(base + " --out " + (work_dir() / "b").string()), 0);
  ASSERT_EQ(run("simulate --config " + (work_dir() / "noisy.cfg").string() +
                " --seed 43 --out " + (work_dir() / "c").string()),
            0);
  for (const char* f :
       {"trace_constant.csv", "trace_riccati.csv", "sensor_log.csv"}) {
    EXPECT_EQ(slurp(work_dir() / "a" / f), slurp(work_dir() / "b" / f)) << f;
    EXPECT_NE(slurp(work_dir() / "a" / f), slurp(work_dir() / "c" / f)) << f;
  }
}

TEST_F(CliTest, ReplayRoundTrip) {
  std::ofstream cfg(work_dir() / "gen.cfg");
  cfg << "t_end = 10\ndt = 0.01\nsensor.noise = 0\nmeasurements = sampled\n"
      << "observer = constant\nemit_log = true\n";
  cfg.close();
  const fs::path gen = work_dir() / "gen";
  ASSERT_EQ(run("simulate --config " + (work_dir() / "gen.cfg").string() +
                " --out " + gen.string()),
            0);
  const fs::path log = gen / "sensor_log.csv";
  ASSERT_TRUE(fs::exists(log));

  const fs::path rep = work_dir() / "rep";
  ASSERT_EQ(run("replay " + log.string() + " --observer constant --out " +
                rep.string()),
            0);
  EXPECT_TRUE(fs::exists(rep / "replay_constant.csv"));
  EXPECT_TRUE(fs::exists(rep / "replay_summary_constant.json"));
  const auto j =
      nlohmann::json::parse(slurp(rep / "replay_summary_constant.json"));
  EXPECT_EQ(j["rows"].get<std::size_t>(), 1000u);

  // Same log with --add-bias shifts the gyro tail mean by ~10.
  const fs::path rep2 = work_dir() / "rep2";
  ASSERT_EQ(run("replay " + log.string() +
                " --observer constant --add-bias 10,10,10 --out " +
                rep2.string()),
            0);
  const auto j2 =
      nlohmann::json::parse(slurp(rep2 / "replay_summary_constant.json"));
  const double shifted = j2["bias_gyro_tail_mean"][2].get<double>();
  const double plain = j["bias_gyro_tail_mean"][2].get<double>();
  EXPECT_NEAR(shifted - plain, 10.0, 0.5);
}

TEST_F(CliTest, ReplayMissingLogFails) {
  EXPECT_EQ(run("replay " + (work_dir() / "nope.csv").string() +
                " --observer constant 2> " +
                (work_dir() / "err.txt").string()),
            1);
  EXPECT_NE(slurp(work_dir() / "err.txt").find("error"), std::string::npos);
}

TEST_F(CliTest, InvalidConfigRejected) {
  std::ofstream cfg(work_dir() / "bad.cfg");
  cfg << "dt = -1\n";
  cfg.close();
  EXPECT_EQ(run("simulate --config " + (work_dir() / "bad.cfg").string() +
                " 2> /dev/null"),
            1);
}
