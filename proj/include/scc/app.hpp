#ifndef SCC_APP_HPP
#define SCC_APP_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "scc/metrics.hpp"
#include "scc/planner.hpp"
#include "scc/raster_io.hpp"
#include "scc/scene.hpp"
#include "scc/velocity.hpp"

namespace scc::app {

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_usage = 2,
  exit_unsafe_start = 3,
  exit_unsafe_goal = 4,
  exit_no_path = 5,
  exit_validation_failed = 6,
};

inline int exit_code_for(PlanStatus s)
{
  switch (s) {
    case PlanStatus::success: return exit_ok;
    case PlanStatus::unsafe_start: return exit_unsafe_start;
    case PlanStatus::unsafe_goal: return exit_unsafe_goal;
    case PlanStatus::no_path: return exit_no_path;
  }
  return exit_failure;
}

// ---------------------------------------------------------------------------
// Text formats
// ---------------------------------------------------------------------------

/// Shortest representation that parses back to the same double.
inline std::string fmt(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline double parse_double(const std::string& s)
{
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

inline void write_text(const std::filesystem::path& p, const std::string& content)
{
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(p.string() + ": cannot write");
  out << content;
}

/// `scc-path 1`, then the pose count and one `x y z phi` line per pose.
inline std::string format_path(const std::vector<TaskPose>& poses)
{
  std::ostringstream os;
  os << "scc-path 1\nposes " << poses.size() << "\n";
  for (const auto& p : poses)
    os << fmt(p.position().x()) << ' ' << fmt(p.position().y()) << ' ' << fmt(p.position().z()) << ' '
       << fmt(p.yaw()) << '\n';
  return os.str();
}

/// `scc-trajectory 1`, the knot count, a column line, then one knot per line.
inline std::string format_trajectory(const Trajectory& t)
{
  std::ostringstream os;
  os << "scc-trajectory 1\nknots " << t.t.size() << "\nt x y z phi v\n";
  for (std::size_t i = 0; i < t.t.size(); ++i) {
    const auto& p = t.poses[i];
    os << fmt(t.t[i]) << ' ' << fmt(p.position().x()) << ' ' << fmt(p.position().y()) << ' ' << fmt(p.position().z())
       << ' ' << fmt(p.yaw()) << ' ' << fmt(t.v[i]) << '\n';
  }
  return os.str();
}

inline Trajectory parse_trajectory(const std::string& text, const std::string& source = "<trajectory>")
{
  std::istringstream in(text);
  std::string magic, word;
  int version = 0;
  std::size_t n = 0;
  auto bad = [&](const std::string& what) { return std::runtime_error(source + ": " + what); };
  if (!(in >> magic >> version) || magic != "scc-trajectory" || version != 1) throw bad("not an scc-trajectory 1 file");
  if (!(in >> word >> n) || word != "knots") throw bad("missing knot count");
  for (const char* col : {"t", "x", "y", "z", "phi", "v"})
    if (!(in >> word) || word != col) throw bad("unexpected column header");
  Trajectory t;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::string, 6> f;
    for (auto& s : f)
      if (!(in >> s)) throw bad("truncated at knot " + std::to_string(i));
    try {
      t.t.push_back(parse_double(f[0]));
      t.poses.emplace_back(Vec3(parse_double(f[1]), parse_double(f[2]), parse_double(f[3])), parse_double(f[4]));
      t.v.push_back(parse_double(f[5]));
    } catch (const std::exception& e) {
      throw bad("knot " + std::to_string(i) + ": " + e.what());
    }
  }
  if (in >> word) throw bad("trailing data");
  return t;
}

/// Versioned CSV: a `# schema: <name>/<version>` line, then a header row.
inline std::string csv_preamble(const std::string& schema, const std::string& header)
{
  return "# schema: " + schema + "\n" + header + "\n";
}

// ---------------------------------------------------------------------------
// plan
// ---------------------------------------------------------------------------

struct PlanOptions {
  std::string scene_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool continuous_cover = false;
  bool shared_scenarios = false;
  CheckerKind method = CheckerKind::scenario;
  std::string raster_path;  ///< replaces the analytic field when set
  std::size_t K = 101;
  std::size_t l = 200;
};

struct PlanOutcome {
  PathResult result;
  std::vector<TaskPose> path;  ///< resampled to K poses
  std::optional<VelocityProfile> profile;
  std::optional<Trajectory> trajectory;
  std::string note;  ///< why scheduling was skipped, if it was
};

inline Scene apply_plan_flags(Scene s, const PlanOptions& o)
{
  if (o.seed) s.planner.seed = *o.seed;
  if (o.continuous_cover) s.planner.safety.continuous_cover = true;
  if (o.shared_scenarios) s.planner.safety.shared_scenarios = true;
  return s;
}

/// Occupancy field used for scheduling and validation: the raster file if
/// given, otherwise the analytic scene (requires d_stop on every obstacle).
inline std::unique_ptr<OccupancyField> scene_field(const Scene& s, const std::string& raster_path)
{
  if (!raster_path.empty()) return std::make_unique<RasterField>(load_raster(raster_path).with_mode(Interpolation::trilinear));
  for (const auto& o : s.obstacles)
    if (!o.d_stop) return nullptr;
  return std::make_unique<AnalyticField>(s.obstacles, s.workspace);
}

/// plan -> interpolate_path -> schedule -> time_parameterize.
inline PlanOutcome run_plan(const Scene& s, const PlanOptions& o)
{
  PlanOutcome out;
  std::unique_ptr<OccupancyField> field = scene_field(s, o.raster_path);
  const SampleRegion region = planning_region(s.robot, s.planner.tracking_inflation(), s.planner.safety);
  std::unique_ptr<EdgeChecker> checker;
  if (o.method == CheckerKind::scenario) {
    if (!field) throw std::invalid_argument("scenario planning needs d_stop on every obstacle (or --raster)");
    checker = std::make_unique<ScenarioChecker>(*field, region, s.planner.safety, Rng(derive_seed(s.planner.seed, 3)));
  } else {
    checker = std::make_unique<BaselineChecker>(o.method, s.obstacles, region, s.planner.safety);
  }
  out.result = plan(*checker, s.workspace, s.start, s.goal, s.planner);
  if (!out.result.ok()) return out;
  out.path = interpolate_path(out.result, o.K);
  if (o.l == 0) {
    out.note = "velocity scheduling disabled (l = 0)";
    return out;
  }
  if (!field) {
    out.note = "velocity scheduling skipped: obstacles without d_stop";
    return out;
  }
  if (position_length(out.path) == 0.0) {
    out.note = "velocity scheduling skipped: path has zero length";
    return out;
  }
  try {
    out.profile = schedule(*field, out.path, s.robot, ScheduleConfig::from(s.planner), o.l);
    out.trajectory = time_parameterize(out.path, *out.profile);
  } catch (const PreconditionError& e) {
    out.profile.reset();
    out.note = std::string("velocity scheduling failed: ") + e.what();
  } catch (const StallError& e) {
    out.note = std::string("time parameterization failed: ") + e.what();
  }
  return out;
}

inline void write_plan_outputs(const std::filesystem::path& dir, const Scene& s, const PlanOutcome& out)
{
  std::filesystem::create_directories(dir);
  write_text(dir / "result.txt", "scc-result 1\nscene " + s.name + "\n" + out.result.serialize());
  if (!out.result.ok()) return;
  write_text(dir / "path.txt", format_path(out.path));
  if (out.profile) {
    std::ostringstream os;
    os << csv_preamble("scc-profile/1", "s,d_o,v");
    for (std::size_t i = 0; i < out.profile->s.size(); ++i)
      os << fmt(out.profile->s[i]) << ',' << fmt(out.profile->d_o[i]) << ',' << fmt(out.profile->v[i]) << '\n';
    write_text(dir / "profile.csv", os.str());
  }
  if (out.trajectory) write_text(dir / "trajectory.txt", format_trajectory(*out.trajectory));
}

inline int cmd_plan(const PlanOptions& o, std::ostream& log)
{
  const Scene s = apply_plan_flags(load_scene(o.scene_path), o);
  const PlanOutcome out = run_plan(s, o);
  write_plan_outputs(o.out_dir, s, out);
  log << "status: " << to_string(out.result.status) << "\n";
  if (out.result.ok()) {
    log << "cost: " << fmt(out.result.cost) << "\nwaypoints: " << out.result.poses.size()
        << "\nplan_seconds: " << out.result.stats.plan_seconds << "\n";
    if (out.trajectory) log << "duration: " << fmt(out.trajectory->duration()) << "\n";
    if (out.profile && !out.profile->below_v_min.empty())
      log << "warning: " << out.profile->below_v_min.size() << " profile samples below v_min\n";
    if (!out.note.empty()) log << "note: " << out.note << "\n";
  }
  return exit_code_for(out.result.status);
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

struct ValidateOptions {
  std::string scene_path;
  std::string out_dir = ".";          ///< directory holding trajectory.txt
  std::string trajectory_path;        ///< overrides out_dir/trajectory.txt
  std::string raster_path;
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  std::size_t points = 100;
  double threshold = 0.01;   ///< max admissible violation fraction
  double gamma_scale = 1.0;  ///< scales the tracking-error model at validation
};

inline int cmd_validate(const ValidateOptions& o, std::ostream& log)
{
  const Scene s = load_scene(o.scene_path);
  const std::filesystem::path traj_path =
      o.trajectory_path.empty() ? std::filesystem::path(o.out_dir) / "trajectory.txt" : std::filesystem::path(o.trajectory_path);
  const Trajectory traj = parse_trajectory(detail::read_text(traj_path.string()), traj_path.string());
  const auto field = scene_field(s, o.raster_path);
  if (!field) throw std::invalid_argument("validation needs d_stop on every obstacle (or --raster)");
  Rng rng(derive_seed(o.seed, hash_label("validate")));
  const ValidationConfig cfg{s.planner.safety.delta, o.trials, o.points};
  const ViolationReport rep =
      monte_carlo_validate(*field, traj, s.robot, s.planner.gamma_tilde.scaled(o.gamma_scale), cfg, rng);
  const bool pass = rep.fraction() <= o.threshold;
  std::ostringstream os;
  os << csv_preamble("scc-validation/1", "trials,checked,violations,fraction,threshold,gamma_scale,pass");
  os << rep.trials << ',' << rep.checked << ',' << rep.violations << ',' << fmt(rep.fraction()) << ','
     << fmt(o.threshold) << ',' << fmt(o.gamma_scale) << ',' << (pass ? 1 : 0) << '\n';
  std::filesystem::create_directories(o.out_dir);
  write_text(std::filesystem::path(o.out_dir) / "validation.csv", os.str());
  log << "violations: " << rep.violations << " / " << rep.checked << " (" << rep.fraction() << ")\n"
      << (pass ? "PASS" : "FAIL") << " at threshold " << o.threshold << "\n";
  return pass ? exit_ok : exit_validation_failed;
}

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

struct MetricsOptions {
  std::vector<std::string> pred_paths;
  std::string truth_path;
  std::string out_dir = ".";
};

struct MetricsRow {
  std::string name;
  double pa, miou, iou_obstacle, iou_free, brier, nll;
  bool obstacle_absent, free_absent;
  ReliabilityDiagram diagram;
};

inline MetricsRow evaluate(const std::string& name, const LabeledRaster& lr)
{
  const MeanIoU m = mean_iou(lr);
  return {name, pixel_accuracy(lr), m.value, m.per_class[0], m.per_class[1], brier_score(lr), nll(lr),
          m.absent[0], m.absent[1], reliability(lr)};
}

/// One row per member followed by the ensemble-mean row.
inline std::vector<MetricsRow> compute_metrics(const std::vector<RasterField>& members, const RasterField& truth)
{
  std::vector<MetricsRow> rows;
  for (std::size_t m = 0; m < members.size(); ++m)
    rows.push_back(evaluate("member_" + std::to_string(m), LabeledRaster::from(members[m], truth)));
  rows.push_back(evaluate("ensemble", LabeledRaster::from(ensemble_fuse(PredictionStack{members}), truth)));
  return rows;
}

inline std::string format_metrics(const std::vector<MetricsRow>& rows)
{
  std::ostringstream os;
  os << csv_preamble("scc-metrics/1", "name,pa,miou,iou_obstacle,iou_free,brier,nll,absent_classes");
  for (const auto& r : rows) {
    std::string absent;
    if (r.obstacle_absent) absent += "obstacle";
    if (r.free_absent) absent += absent.empty() ? "free" : ";free";
    os << r.name << ',' << fmt(r.pa) << ',' << fmt(r.miou) << ',' << fmt(r.iou_obstacle) << ',' << fmt(r.iou_free)
       << ',' << fmt(r.brier) << ',' << fmt(r.nll) << ',' << absent << '\n';
  }
  return os.str();
}

inline std::string format_reliability(const std::vector<MetricsRow>& rows)
{
  std::ostringstream os;
  os << csv_preamble("scc-reliability/1", "name,bin,lo,hi,count,mean_confidence,accuracy");
  for (const auto& r : rows)
    for (std::size_t b = 0; b < ReliabilityDiagram::bins; ++b) {
      const auto& bin = r.diagram.bin[b];
      os << r.name << ',' << b << ',' << fmt(bin.lo) << ',' << fmt(bin.hi) << ',' << bin.count << ','
         << fmt(bin.mean_confidence) << ',' << fmt(bin.accuracy) << '\n';
    }
  return os.str();
}

inline int cmd_metrics(const MetricsOptions& o, std::ostream& log)
{
  if (o.pred_paths.empty()) throw std::invalid_argument("metrics: at least one --pred raster is required");
  std::vector<RasterField> members;
  for (const auto& p : o.pred_paths) members.push_back(load_raster(p));
  const RasterField truth = load_raster(o.truth_path);
  const auto rows = compute_metrics(members, truth);
  std::filesystem::create_directories(o.out_dir);
  write_text(std::filesystem::path(o.out_dir) / "metrics.csv", format_metrics(rows));
  write_text(std::filesystem::path(o.out_dir) / "reliability.csv", format_reliability(rows));
  for (const auto& r : rows)
    log << r.name << ": PA " << r.pa << "  mIoU " << r.miou << "  BS " << r.brier << "  NLL " << r.nll << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchmarkOptions {
  std::string spec_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool continuous_cover = false;
  bool shared_scenarios = false;
  std::optional<std::size_t> runs;  ///< overrides the spec's run count
};

struct RunRow {
  std::string method;
  double sweep = 0.0;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::string status;
  double cost = std::numeric_limits<double>::quiet_NaN();  ///< NaN unless status is success
  double plan_seconds = 0.0;
  double check_seconds = 0.0;
  std::size_t segment_checks = 0;
  std::size_t tree_size = 0;
  std::size_t waypoints = 0;
  std::size_t obstacles = 0;
  double duration = std::numeric_limits<double>::quiet_NaN();  ///< trajectory time (scenario runs with l > 0)
};

struct SummaryRow {
  std::string method;
  double sweep = 0.0;
  std::size_t runs = 0;
  std::size_t successes = 0;
  double mean_cost, std_cost, normalized_mean, normalized_std;
  double mean_plan_seconds, std_plan_seconds, mean_check_seconds;
};

/// Seed of one benchmark run; independent of which other cells exist.
inline std::uint64_t run_seed(std::uint64_t master, const std::string& method, double sweep, std::size_t run)
{
  return derive_seed(master, hash_label(method), double_bits(sweep), static_cast<std::uint64_t>(run));
}

/// Seed of the random scene for one (obstacle count, run); shared by methods.
inline std::uint64_t scene_seed(std::uint64_t master, std::size_t count, std::size_t run)
{
  return derive_seed(master, hash_label("scene"), static_cast<std::uint64_t>(count), static_cast<std::uint64_t>(run));
}

struct BenchmarkTask {
  std::size_t method_index;
  double sweep;
  std::size_t run;
};

inline Scene benchmark_scene(const Scene& base, const BenchmarkSpec& spec, const BenchmarkOptions& o, double sweep,
                             std::size_t run)
{
  Scene s = base;
  if (spec.n_iter) s.planner.n_iter = *spec.n_iter;
  if (spec.n_x) s.planner.safety.n_x = *spec.n_x;
  if (o.continuous_cover) s.planner.safety.continuous_cover = true;
  if (o.shared_scenarios) s.planner.safety.shared_scenarios = true;
  if (spec.variable == SweepVariable::uncertainty) return with_uncertainty(std::move(s), sweep);
  const auto count = static_cast<std::size_t>(sweep);
  Rng rng(scene_seed(o.seed, count, run));
  s.obstacles = random_spheres(s.workspace, count, spec.random.radius, s.start, s.goal, spec.random.clearance, rng);
  return with_uncertainty(std::move(s), spec.random.uncertainty);
}

inline RunRow run_one(const Scene& base, const BenchmarkSpec& spec, const BenchmarkOptions& o, const BenchmarkTask& t)
{
  RunRow row;
  const CheckerKind method = spec.methods[t.method_index];
  row.method = std::string(to_string(method));
  row.sweep = t.sweep;
  row.run = t.run;
  row.seed = run_seed(o.seed, row.method, t.sweep, t.run);
  try {
    Scene s = benchmark_scene(base, spec, o, t.sweep, t.run);
    s.planner.seed = row.seed;
    row.obstacles = s.obstacles.size();
    const PlanningSetup setup = make_setup(s, method, spec.field, spec.raster_cell, derive_seed(row.seed, 3));
    const auto t0 = std::chrono::steady_clock::now();
    const PathResult res = plan(*setup.checker, s.workspace, s.start, s.goal, s.planner);
    row.plan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    row.status = to_string(res.status);
    row.check_seconds = res.stats.check_seconds;
    row.segment_checks = res.stats.segment_checks;
    row.tree_size = res.tree_size;
    row.waypoints = res.poses.size();
    if (res.ok()) {
      const auto path = interpolate_path(res, spec.K);
      row.cost = path_cost(path, s.planner.r);
      if (spec.l > 0 && method == CheckerKind::scenario && position_length(path) > 0.0) {
        try {
          const auto prof = schedule(*setup.field, path, s.robot, ScheduleConfig::from(s.planner), spec.l);
          row.duration = time_parameterize(path, prof).duration();
        } catch (const std::exception&) {
          // Left as NaN: the run still counts for cost and time.
        }
      }
    }
  } catch (const std::exception&) {
    row.status = "error";
  }
  return row;
}

/// Runs every (method, sweep value, run) cell on a pool of `threads`
/// workers. Rows come back in task order regardless of scheduling.
inline std::vector<RunRow> run_benchmark(const BenchmarkSpec& spec, const Scene& base, const BenchmarkOptions& o,
                                         const std::function<void(const RunRow&)>& progress = {})
{
  const std::size_t runs = o.runs.value_or(spec.runs);
  std::vector<BenchmarkTask> tasks;
  for (std::size_t m = 0; m < spec.methods.size(); ++m)
    for (double v : spec.values)
      for (std::size_t r = 0; r < runs; ++r) tasks.push_back({m, v, r});

  std::vector<RunRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      rows[i] = run_one(base, spec, o, tasks[i]);
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(rows[i]);
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(o.threads, tasks.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

inline std::pair<double, double> mean_std(const std::vector<double>& xs)
{
  if (xs.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double s = 0.0;
  for (double x : xs) s += x;
  const double m = s / static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, xs.size() > 1 ? std::sqrt(v / static_cast<double>(xs.size() - 1)) : 0.0};
}

/// Per-cell statistics; a pure function of the rows so the summary can be
/// re-derived from runs.csv.
inline std::vector<SummaryRow> summarize(const std::vector<RunRow>& rows)
{
  std::vector<CostSample> samples;
  for (const auto& r : rows) samples.push_back({r.method, r.sweep, r.cost});
  const auto cells = normalized_costs(samples);
  std::vector<SummaryRow> out;
  for (const auto& c : cells) {
    SummaryRow s;
    s.method = c.method;
    s.sweep = c.sweep;
    s.successes = c.runs;
    s.mean_cost = c.mean;
    s.std_cost = c.stddev;
    s.normalized_mean = c.normalized_mean;
    s.normalized_std = c.normalized_stddev;
    std::vector<double> plan_t, check_t;
    for (const auto& r : rows)
      if (r.method == c.method && r.sweep == c.sweep) {
        ++s.runs;
        plan_t.push_back(r.plan_seconds);
        check_t.push_back(r.check_seconds);
      }
    std::tie(s.mean_plan_seconds, s.std_plan_seconds) = mean_std(plan_t);
    s.mean_check_seconds = mean_std(check_t).first;
    out.push_back(s);
  }
  return out;
}

inline constexpr const char* runs_header =
    "method,sweep,run,seed,status,cost,plan_seconds,check_seconds,segment_checks,tree_size,waypoints,obstacles,duration";

inline std::string format_runs(const std::vector<RunRow>& rows)
{
  std::ostringstream os;
  os << csv_preamble("scc-runs/1", runs_header);
  for (const auto& r : rows)
    os << r.method << ',' << fmt(r.sweep) << ',' << r.run << ',' << r.seed << ',' << r.status << ',' << fmt(r.cost) << ','
       << fmt(r.plan_seconds) << ',' << fmt(r.check_seconds) << ',' << r.segment_checks << ',' << r.tree_size << ','
       << r.waypoints << ',' << r.obstacles << ',' << fmt(r.duration) << '\n';
  return os.str();
}

inline std::vector<RunRow> parse_runs(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "# schema: scc-runs/1") throw std::runtime_error("runs.csv: bad schema line");
  if (!std::getline(in, line) || line != runs_header) throw std::runtime_error("runs.csv: bad header");
  std::vector<RunRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 13) throw std::runtime_error("runs.csv: expected 13 fields: " + line);
    RunRow r;
    r.method = f[0];
    r.sweep = parse_double(f[1]);
    r.run = std::stoul(f[2]);
    r.seed = std::stoull(f[3]);
    r.status = f[4];
    r.cost = parse_double(f[5]);
    r.plan_seconds = parse_double(f[6]);
    r.check_seconds = parse_double(f[7]);
    r.segment_checks = std::stoul(f[8]);
    r.tree_size = std::stoul(f[9]);
    r.waypoints = std::stoul(f[10]);
    r.obstacles = std::stoul(f[11]);
    r.duration = parse_double(f[12]);
    rows.push_back(r);
  }
  return rows;
}

inline std::string format_summary(const std::vector<SummaryRow>& rows)
{
  std::ostringstream os;
  os << csv_preamble("scc-summary/1",
                     "method,sweep,runs,successes,mean_cost,std_cost,normalized_mean,normalized_std,"
                     "mean_plan_seconds,std_plan_seconds,mean_check_seconds");
  for (const auto& s : rows)
    os << s.method << ',' << fmt(s.sweep) << ',' << s.runs << ',' << s.successes << ',' << fmt(s.mean_cost) << ','
       << fmt(s.std_cost) << ',' << fmt(s.normalized_mean) << ',' << fmt(s.normalized_std) << ','
       << fmt(s.mean_plan_seconds) << ',' << fmt(s.std_plan_seconds) << ',' << fmt(s.mean_check_seconds) << '\n';
  return os.str();
}

inline int cmd_benchmark(const BenchmarkOptions& o, std::ostream& log)
{
  const BenchmarkSpec spec = load_spec(o.spec_path);
  const Scene base = load_scene(spec.scene_path);
  std::size_t done = 0;
  const std::size_t total = spec.methods.size() * spec.values.size() * o.runs.value_or(spec.runs);
  const auto rows = run_benchmark(spec, base, o, [&](const RunRow& r) {
    ++done;
    log << "[" << done << "/" << total << "] " << r.method << " sweep=" << r.sweep << " run=" << r.run << " "
        << r.status << " cost=" << fmt(r.cost) << " t=" << r.plan_seconds << "s\n";
  });
  std::filesystem::create_directories(o.out_dir);
  write_text(std::filesystem::path(o.out_dir) / "runs.csv", format_runs(rows));
  const auto summary = summarize(rows);
  write_text(std::filesystem::path(o.out_dir) / "summary.csv", format_summary(summary));
  for (const auto& s : summary)
    log << s.method << " @ " << s.sweep << ": " << s.successes << "/" << s.runs << " ok, normalized cost "
        << fmt(s.normalized_mean) << ", plan time " << fmt(s.mean_plan_seconds) << " s\n";
  return exit_ok;
}

}  // namespace scc::app

#endif  // SCC_APP_HPP
