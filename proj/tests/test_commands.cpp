#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mfac/commands.hpp"

using namespace mfac;
namespace fs = std::filesystem;

namespace {

class Commands : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mfac_commands_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunOptions options() const { return RunOptions{dir_, std::nullopt, false}; }

  static std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
  }

  static std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
  }

  fs::path dir_;
  std::ostringstream log_;
  std::ostringstream err_;
};

std::size_t count_columns(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

}  // namespace

TEST_F(Commands, RunWritesTraceAndMetrics) {
  auto cfg = preset("example1");
  cfg.loop.plant.benchmark.y2_denominator_fix = true;
  ASSERT_EQ(cmd_run(cfg, options(), log_, err_), exit_ok);
  const auto rows = lines(slurp(dir_ / "trace.csv"));
  ASSERT_EQ(rows.size(), 1u + 998u);
  EXPECT_EQ(rows.front().substr(0, 27), "i,y1,y2,yd1,yd2,u1,u2,e1,e2");
  for (const auto& row : rows) EXPECT_EQ(count_columns(row), 1u + 4 * 2 + 2 * 2 * 4);
  const auto metrics = slurp(dir_ / "metrics.txt");
  EXPECT_NE(metrics.find("window = 3..1000"), std::string::npos);
  EXPECT_NE(metrics.find("e1_sum_sq = "), std::string::npos);
  EXPECT_NE(metrics.find("e2_sum_sq = "), std::string::npos);
}

TEST_F(Commands, RunIsByteIdenticalOnRerun) {
  const auto cfg = preset("lti");
  ASSERT_EQ(cmd_run(cfg, options(), log_, err_), exit_ok);
  const auto first = slurp(dir_ / "trace.csv");
  ASSERT_EQ(cmd_run(cfg, options(), log_, err_), exit_ok);
  EXPECT_EQ(first, slurp(dir_ / "trace.csv"));
}

TEST_F(Commands, DivergenceReturnsThreeAndKeepsPartialTrace) {
  ASSERT_EQ(cmd_run(preset("example1"), options(), log_, err_), exit_diverged);
  EXPECT_NE(err_.str().find("diverged"), std::string::npos);
  EXPECT_GT(lines(slurp(dir_ / "trace.csv")).size(), 1u);
}

TEST_F(Commands, CompareScalarPlantGivesEqualColumns) {
  ASSERT_EQ(cmd_compare(preset("lti"), options(), log_, err_), exit_ok);
  const auto rows = lines(slurp(dir_ / "compare.txt"));
  ASSERT_EQ(rows.size(), 3u);
  std::istringstream row(rows[2]);
  std::string name, proposed, baseline;
  row >> name >> proposed >> baseline;
  EXPECT_EQ(name, "y1");
  EXPECT_NEAR(std::stod(proposed), std::stod(baseline), 1e-9);
  EXPECT_TRUE(fs::exists(dir_ / "trace_proposed.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "trace_baseline.csv"));
}

TEST_F(Commands, CompareHugeLambdaGivesEqualColumns) {
  auto cfg = preset("example1");
  cfg.loop.controller.lambda = 1e12;
  ASSERT_EQ(cmd_compare(cfg, options(), log_, err_), exit_ok);
  const auto rows = lines(slurp(dir_ / "compare.txt"));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t r = 2; r < 4; ++r) {
    std::istringstream row(rows[r]);
    std::string name, proposed, baseline;
    row >> name >> proposed >> baseline;
    EXPECT_NEAR(std::stod(proposed), std::stod(baseline), 1e-6 * std::stod(proposed));
  }
}

TEST_F(Commands, StabilityOnNilpotentConfigHasZeroRadius) {
  // y(i+1) = u(i) with the matched estimate [0, 1]: the innovation is always zero, the
  // output block stays zero and A(i) is the 2 x 2 down-shift.
  const auto cfg = preset("identity");
  ASSERT_EQ(cmd_stability(cfg, options(), log_, err_), exit_ok);
  const auto rows = lines(slurp(dir_ / "stability.csv"));
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows.front(), "i,rho_A,d4,flag_rho,flag_d4");
  EXPECT_EQ(rows.back().rfind("# lambda_min=", 0), 0u);
  for (std::size_t r = 1; r + 1 < rows.size(); ++r) {
    std::istringstream row(rows[r]);
    std::string i, rho;
    std::getline(row, i, ',');
    std::getline(row, rho, ',');
    EXPECT_EQ(rho, "0") << rows[r];
  }
}

TEST_F(Commands, StabilityOnDivergedRunFlagsEveryStep) {
  EXPECT_EQ(cmd_stability(preset("example1"), options(), log_, err_), exit_diverged);
  const auto rows = lines(slurp(dir_ / "stability.csv"));
  ASSERT_GT(rows.size(), 2u);
  for (std::size_t r = 1; r + 1 < rows.size(); ++r) EXPECT_EQ(count_columns(rows[r]), 5u);
}

TEST_F(Commands, SweepSortsGridAndMatchesRun) {
  const auto cfg = preset("lti");
  ASSERT_EQ(cmd_sweep(cfg, options(), {10, 0.1, 1, 1}, log_, err_), exit_ok);
  const auto rows = lines(slurp(dir_ / "sweep.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], "lambda,e1_sum_sq,max_rho_A,status");
  EXPECT_EQ(rows[1].rfind("0.10000000000000001,", 0), 0u);
  EXPECT_EQ(rows[2].rfind("1,", 0), 0u);
  EXPECT_EQ(rows[3].rfind("10,", 0), 0u);

  ASSERT_EQ(cmd_run(cfg, options(), log_, err_), exit_ok);
  const auto metrics = slurp(dir_ / "metrics.txt");
  const auto value = rows[2].substr(2, rows[2].find(',', 2) - 2);
  EXPECT_NE(metrics.find("e1_sum_sq = " + value), std::string::npos);
}

TEST_F(Commands, SweepRejectsEmptyGrid) {
  EXPECT_EQ(cmd_sweep(preset("lti"), options(), {}, log_, err_), exit_config_error);
  EXPECT_EQ(cmd_sweep(preset("lti"), options(), {-1}, log_, err_), exit_config_error);
}

TEST_F(Commands, SvgPlotsAreWritten) {
  auto opts = options();
  opts.svg = true;
  ASSERT_EQ(cmd_run(preset("lti"), opts, log_, err_), exit_ok);
  for (const char* name : {"tracking_y1.svg", "inputs.svg", "input_gain.svg"}) {
    const auto text = slurp(dir_ / name);
    EXPECT_EQ(text.rfind("<svg", 0), 0u) << name;
  }
}

TEST(TraceCsv, SchemaForSmallTrace) {
  SimulationTrace trace{Dimensions(1, 1, 1), {}};
  StepRecord s;
  s.i = 1;
  s.y = VectorXd::Constant(1, 0.5);
  s.y_ref = VectorXd::Constant(1, 1.0);
  s.u = VectorXd::Constant(1, 0.1);
  s.e = VectorXd::Constant(1, 0.5);
  s.phi = MatrixXd{{0.25, 2.0}};
  trace.steps.push_back(s);
  std::ostringstream out;
  write_trace_csv(trace, out);
  EXPECT_EQ(out.str(), "i,y1,yd1,u1,e1,phi_1_1,phi_1_2\n1,0.5,1,0.10000000000000001,0.5,0.25,2\n");
}
