// End-to-end runs of the scc binary.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "scc/app.hpp"
#include "scc/raster_io.hpp"

namespace scc {
namespace {

namespace fs = std::filesystem;

const std::string kCli = SCC_CLI_PATH;
const fs::path kCorpus = SCC_CORPUS_DIR;

const fs::path kScratch = fs::temp_directory_path() / ("scc_cli_" + std::to_string(::getpid()));

struct RemoveScratch {
  ~RemoveScratch()
  {
    std::error_code ec;
    fs::remove_all(kScratch, ec);
  }
} remove_scratch;

fs::path scratch(const std::string& name)
{
  const fs::path p = kScratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run(const std::string& args)
{
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& p)
{
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    rows.push_back(f);
  }
  return rows;
}

std::string corpus(const std::string& name) { return (kCorpus / name).string(); }

// Two walls leave a straight corridor along y = 0.5 with about 3 cm of slack
// on either side of the robot's threshold margin.
const std::string kCorridor = R"({
  "schema_version": 1,
  "name": "corridor",
  "workspace": {"lo": [0, 0, 0.25], "hi": [2, 1, 0.35]},
  "robot": {"semi_axes": [0.05, 0.02, 0.01]},
  "start": {"position": [0.1, 0.5, 0.3], "yaw": 0},
  "goal": {"position": [1.9, 0.5, 0.3], "yaw": 0},
  "obstacles": [
    {"type": "cuboid", "center": [1, 0.215, 0.3], "half_extents": [0.6, 0.215, 0.1], "d_stop": 0.02},
    {"type": "cuboid", "center": [1, 0.785, 0.3], "half_extents": [0.6, 0.215, 0.1], "d_stop": 0.02}
  ],
  "planner": {"delta": 0.05, "n_x": 100, "n_iter": 600, "seed": 3}
})";

TEST(CliPlan, EmptySceneRunsAtFullSpeed)
{
  const fs::path out = scratch("empty");
  ASSERT_EQ(run("plan --scene " + corpus("empty.json") + " --out-dir " + out.string()), 0);
  for (const char* f : {"result.txt", "path.txt", "profile.csv", "trajectory.txt"})
    EXPECT_TRUE(fs::exists(out / f)) << f;

  const auto profile = csv_rows(out / "profile.csv");
  ASSERT_EQ(profile.size(), 202u);  // header + l + 1 samples
  EXPECT_EQ(profile[0], (std::vector<std::string>{"s", "d_o", "v"}));
  for (std::size_t i = 1; i < profile.size(); ++i) EXPECT_EQ(app::parse_double(profile[i][2]), 0.2) << i;

  const Trajectory traj = app::parse_trajectory(slurp(out / "trajectory.txt"));
  double length = 0.0;
  for (std::size_t i = 1; i < traj.poses.size(); ++i)
    length += (traj.poses[i].position() - traj.poses[i - 1].position()).norm();
  EXPECT_GE(length, 1.0 - 1e-9);
  EXPECT_LT(length, 1.3);
  EXPECT_NEAR(traj.duration(), length / 0.2, 1e-9);
}

TEST(CliPlan, RepeatRunsAreByteIdentical)
{
  const fs::path a = scratch("rep_a"), b = scratch("rep_b");
  const std::string args = "plan --scene " + corpus("simple.json") + " --seed 5 --out-dir ";
  ASSERT_EQ(run(args + a.string()), 0);
  ASSERT_EQ(run(args + b.string()), 0);
  for (const char* f : {"result.txt", "path.txt", "profile.csv", "trajectory.txt"})
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const fs::path c = scratch("rep_c");
  ASSERT_EQ(run("plan --scene " + corpus("simple.json") + " --seed 6 --out-dir " + c.string()), 0);
  EXPECT_NE(slurp(a / "path.txt"), slurp(c / "path.txt"));
}

TEST(CliPlan, UnsafeEndpointsHaveTheirOwnExitCodes)
{
  const fs::path out = scratch("unsafe");
  EXPECT_EQ(run("plan --scene " + corpus("goal_in_obstacle.json") + " --out-dir " + out.string()), app::exit_unsafe_goal);
  EXPECT_TRUE(fs::exists(out / "result.txt"));
  EXPECT_FALSE(fs::exists(out / "path.txt"));

  std::string swapped = slurp(corpus("goal_in_obstacle.json"));
  const std::string s = "[0.2, 0.5, 0.3]", g = "[1.6, 0.5, 0.3]";
  swapped.replace(swapped.find(s), s.size(), "START");
  swapped.replace(swapped.find(g), g.size(), s);
  swapped.replace(swapped.find("START"), 5, g);
  std::ofstream(out / "swapped.json") << swapped;
  EXPECT_EQ(run("plan --scene " + (out / "swapped.json").string() + " --out-dir " + out.string()),
            app::exit_unsafe_start);
}

TEST(CliPlan, BaselineMethodsPlan)
{
  for (const char* m : {"bounding_volume", "chance_constraint", "max_prob"}) {
    const fs::path out = scratch(std::string("m_") + m);
    EXPECT_EQ(run("plan --scene " + corpus("simple.json") + " --method " + m + " --out-dir " + out.string()), 0) << m;
    EXPECT_TRUE(fs::exists(out / "path.txt")) << m;
  }
}

TEST(CliBenchmark, SmokeSummaryRederivesFromRuns)
{
  const fs::path out = scratch("bench");
  ASSERT_EQ(run("benchmark --spec " + corpus("smoke.json") + " --seed 11 --out-dir " + out.string()), 0);
  const std::string runs_text = slurp(out / "runs.csv");
  const auto rows = app::parse_runs(runs_text);
  ASSERT_EQ(rows.size(), 4u * 2u * 2u);
  std::size_t ok = 0;
  for (const auto& r : rows) {
    EXPECT_NE(r.status, "error");
    if (r.status == "success") {
      ++ok;
      EXPECT_TRUE(std::isfinite(r.cost));
    } else {
      EXPECT_TRUE(std::isnan(r.cost));
    }
  }
  EXPECT_GT(ok, rows.size() / 2);
  EXPECT_EQ(app::format_summary(app::summarize(rows)), slurp(out / "summary.csv"));
  EXPECT_EQ(app::format_runs(rows), runs_text);
}

TEST(CliBenchmark, ThreadCountDoesNotChangeResults)
{
  const fs::path a = scratch("bench_1"), b = scratch("bench_3");
  ASSERT_EQ(run("benchmark --spec " + corpus("smoke.json") + " --runs 1 --out-dir " + a.string()), 0);
  ASSERT_EQ(run("benchmark --spec " + corpus("smoke.json") + " --runs 1 --threads 3 --out-dir " + b.string()), 0);
  const auto ra = app::parse_runs(slurp(a / "runs.csv"));
  const auto rb = app::parse_runs(slurp(b / "runs.csv"));
  ASSERT_EQ(ra.size(), rb.size());
  for (std::size_t i = 0; i < ra.size(); ++i) {
    EXPECT_EQ(ra[i].method, rb[i].method);
    EXPECT_EQ(ra[i].seed, rb[i].seed);
    EXPECT_EQ(ra[i].status, rb[i].status);
    EXPECT_EQ(app::fmt(ra[i].cost), app::fmt(rb[i].cost));
    EXPECT_EQ(ra[i].segment_checks, rb[i].segment_checks);
  }
}

TEST(CliValidate, CorridorPassesAndInflatedTrackingFails)
{
  const fs::path out = scratch("corridor");
  std::ofstream(out / "corridor.json") << kCorridor;
  const std::string scene = (out / "corridor.json").string();
  ASSERT_EQ(run("plan --scene " + scene + " --out-dir " + out.string()), 0);

  EXPECT_EQ(run("validate --scene " + scene + " --out-dir " + out.string() + " --trials 200"), 0);
  auto rows = csv_rows(out / "validation.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LT(app::parse_double(rows[1][3]), 0.01);
  EXPECT_EQ(rows[1][6], "1");

  EXPECT_EQ(run("validate --scene " + scene + " --out-dir " + out.string() + " --trials 200 --gamma-scale 10"),
            app::exit_validation_failed);
  rows = csv_rows(out / "validation.csv");
  EXPECT_GT(app::parse_double(rows[1][3]), 0.01);
  EXPECT_EQ(rows[1][6], "0");
}

TEST(CliValidate, EmptySceneHasNoViolations)
{
  const fs::path out = scratch("val_empty");
  ASSERT_EQ(run("plan --scene " + corpus("empty.json") + " --out-dir " + out.string()), 0);
  ASSERT_EQ(run("validate --scene " + corpus("empty.json") + " --out-dir " + out.string() + " --gamma-scale 10"), 0);
  const auto rows = csv_rows(out / "validation.csv");
  EXPECT_EQ(rows[1][2], "0");
}

RasterField grid(const std::vector<float>& v) { return RasterField(Vec3::Zero(), 0.1, {4, 2, 1}, v); }

TEST(CliMetrics, EnsembleOfIdenticalMembersEqualsTheMember)
{
  const fs::path out = scratch("metrics");
  save_raster((out / "truth.bin").string(), grid({1, 1, 0, 0, 1, 0, 1, 0}));
  save_raster((out / "a.bin").string(), grid({0.9f, 0.6f, 0.4f, 0.1f, 0.7f, 0.55f, 0.3f, 0.2f}));
  save_raster((out / "b.txt").string(), grid({0.7f, 0.8f, 0.1f, 0.45f, 0.9f, 0.2f, 0.6f, 0.05f}), true);
  const std::string truth = " --truth " + (out / "truth.bin").string();
  const std::string a = " --pred " + (out / "a.bin").string(), b = " --pred " + (out / "b.txt").string();

  ASSERT_EQ(run("metrics" + a + truth + " --out-dir " + out.string()), 0);
  auto rows = csv_rows(out / "metrics.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][0], "name");
  EXPECT_EQ(std::vector<std::string>(rows[1].begin() + 1, rows[1].end()),
            std::vector<std::string>(rows[2].begin() + 1, rows[2].end()));

  ASSERT_EQ(run("metrics" + a + a + truth + " --out-dir " + out.string()), 0);
  rows = csv_rows(out / "metrics.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(std::vector<std::string>(rows[1].begin() + 1, rows[1].end()),
            std::vector<std::string>(rows[3].begin() + 1, rows[3].end()));

  ASSERT_EQ(run("metrics" + a + b + truth + " --out-dir " + out.string()), 0);
  rows = csv_rows(out / "metrics.csv");
  ASSERT_EQ(rows.size(), 4u);
  const double bs_a = app::parse_double(rows[1][5]), bs_b = app::parse_double(rows[2][5]);
  EXPECT_LE(app::parse_double(rows[3][5]), 0.5 * (bs_a + bs_b));
  EXPECT_TRUE(fs::exists(out / "reliability.csv"));
}

TEST(CliUsage, BadInvocationsExitWithUsageCode)
{
  const fs::path out = scratch("usage");
  EXPECT_EQ(run(""), app::exit_usage);
  EXPECT_EQ(run("launch"), app::exit_usage);
  EXPECT_EQ(run("plan"), app::exit_usage);
  EXPECT_EQ(run("plan --scene /nonexistent.json"), app::exit_usage);
  EXPECT_EQ(run("plan --scene " + corpus("empty.json") + " --method magic"), app::exit_usage);
  EXPECT_EQ(run("benchmark --spec " + corpus("smoke.json") + " --threads 0"), app::exit_usage);
  std::ofstream(out / "bad.json") << "{\"schema_version\": 1, \"nmae\": 2}";
  EXPECT_EQ(run("plan --scene " + (out / "bad.json").string()), app::exit_usage);
  std::ofstream(out / "junk.bin") << "not a raster";
  EXPECT_EQ(run("metrics --pred " + (out / "junk.bin").string() + " --truth " + (out / "junk.bin").string()),
            app::exit_usage);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("plan --help"), 0);
}

}  // namespace
}  // namespace scc
