// scc: plan, benchmark, validate and metrics front end.

#include <iostream>

#include "CLI11.hpp"

#include "scc/app.hpp"

namespace {

using namespace scc;
using namespace scc::app;

CheckerKind parse_method(const std::string& s)
{
  try {
    return checker_kind_from_string(s);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError("--method", e.what());
  }
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App cli{"Scenario chance-constrained RRT* planning, benchmarking and calibration metrics"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", "scc 1.0.0");

  PlanOptions plan_o;
  std::uint64_t plan_seed = 0;
  std::string plan_method = "scenario";
  std::size_t plan_threads = 1;
  auto* plan_cmd = cli.add_subcommand("plan", "Plan, schedule velocities and time-parameterize one scene");
  plan_cmd->add_option("--scene", plan_o.scene_path, "Scene file (JSON)")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("--out-dir", plan_o.out_dir, "Output directory")->capture_default_str();
  auto* plan_seed_opt = plan_cmd->add_option("--seed", plan_seed, "Planner seed (overrides the scene)");
  plan_cmd->add_flag("--continuous-cover", plan_o.continuous_cover, "Grow the sample region by delta_p / 2");
  plan_cmd->add_flag("--shared-scenarios", plan_o.shared_scenarios, "Reuse one scenario set for every pose");
  plan_cmd->add_option("--method", plan_method, "scenario | bounding_volume | chance_constraint | max_prob")
      ->capture_default_str();
  plan_cmd->add_option("--raster", plan_o.raster_path, "Occupancy raster to plan on instead of the analytic scene")
      ->check(CLI::ExistingFile);
  plan_cmd->add_option("--K", plan_o.K, "Poses of the resampled path")->capture_default_str()->check(CLI::Range(2, 1000000));
  plan_cmd->add_option("--l", plan_o.l, "Velocity-profile intervals (0 disables scheduling)")->capture_default_str();
  plan_cmd->add_option("--threads", plan_threads, "Accepted for uniformity; planning is single-threaded");

  BenchmarkOptions bench_o;
  std::size_t bench_runs = 0;
  auto* bench_cmd = cli.add_subcommand("benchmark", "Run a seeded benchmark campaign");
  bench_cmd->add_option("--spec", bench_o.spec_path, "Benchmark spec file (JSON)")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--out-dir", bench_o.out_dir, "Output directory")->capture_default_str();
  bench_cmd->add_option("--seed", bench_o.seed, "Master seed")->capture_default_str();
  bench_cmd->add_option("--threads", bench_o.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--runs", bench_runs, "Override the spec's runs per cell")->check(CLI::PositiveNumber);
  bench_cmd->add_flag("--continuous-cover", bench_o.continuous_cover, "Grow the sample region by delta_p / 2");
  bench_cmd->add_flag("--shared-scenarios", bench_o.shared_scenarios, "Reuse one scenario set for every pose");

  ValidateOptions val_o;
  auto* val_cmd = cli.add_subcommand("validate", "Monte-Carlo check of a planned trajectory");
  val_cmd->add_option("--scene", val_o.scene_path, "Scene file the trajectory was planned on")
      ->required()
      ->check(CLI::ExistingFile);
  val_cmd->add_option("--out-dir", val_o.out_dir, "Directory with trajectory.txt; validation.csv is written here")
      ->capture_default_str();
  val_cmd->add_option("--trajectory", val_o.trajectory_path, "Trajectory file (default <out-dir>/trajectory.txt)");
  val_cmd->add_option("--raster", val_o.raster_path, "Occupancy raster to validate against")->check(CLI::ExistingFile);
  val_cmd->add_option("--seed", val_o.seed, "Seed")->capture_default_str();
  val_cmd->add_option("--trials", val_o.trials, "Simulated executions")->capture_default_str()->check(CLI::PositiveNumber);
  val_cmd->add_option("--points", val_o.points, "Robot points sampled per knot")->capture_default_str()->check(CLI::PositiveNumber);
  val_cmd->add_option("--threshold", val_o.threshold, "Maximum admissible violation fraction")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  val_cmd->add_option("--gamma-scale", val_o.gamma_scale, "Scale of the tracking-error bound at validation")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  std::size_t val_threads = 1;
  val_cmd->add_option("--threads", val_threads, "Accepted for uniformity; validation is single-threaded");

  MetricsOptions met_o;
  auto* met_cmd = cli.add_subcommand("metrics", "Segmentation and calibration metrics of prediction rasters");
  met_cmd->add_option("--pred", met_o.pred_paths, "Prediction raster(s); several are fused by their mean")
      ->required()
      ->check(CLI::ExistingFile);
  met_cmd->add_option("--truth", met_o.truth_path, "Binary ground-truth raster (0 obstacle, 1 free)")
      ->required()
      ->check(CLI::ExistingFile);
  met_cmd->add_option("--out-dir", met_o.out_dir, "Output directory")->capture_default_str();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*plan_cmd) {
      if (*plan_seed_opt) plan_o.seed = plan_seed;
      plan_o.method = parse_method(plan_method);
      return cmd_plan(plan_o, std::cout);
    }
    if (*bench_cmd) {
      if (bench_runs > 0) bench_o.runs = bench_runs;
      return cmd_benchmark(bench_o, std::cerr);
    }
    if (*val_cmd) return cmd_validate(val_o, std::cout);
    if (*met_cmd) return cmd_metrics(met_o, std::cout);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const RasterFormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_usage;
}
