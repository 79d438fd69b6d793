#ifndef SCC_SCENE_HPP
#define SCC_SCENE_HPP

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "scc/collision.hpp"
#include "scc/geometry.hpp"
#include "scc/occupancy.hpp"
#include "scc/planner.hpp"
#include "scc/random.hpp"

namespace scc {

inline constexpr int scene_schema_version = 1;
inline constexpr int spec_schema_version = 1;

/// Malformed scene or benchmark file. The message names the file and either
/// the line/column (syntax errors) or the offending field path.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Scene {
  std::string name;
  Bounds workspace;
  RobotShape robot;
  TaskPose start;
  TaskPose goal;
  std::vector<Obstacle> obstacles;
  PlannerConfig planner;
};

namespace detail {

using json = nlohmann::json;

/// Strict view of a JSON object: unknown keys and type mismatches are
/// reported with the field path.
class Fields {
public:
  Fields(const json& j, std::string path, std::string source) : j_(&j), path_(std::move(path)), source_(std::move(source))
  {
    if (!j.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const
  {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!ok.count(it.key())) fail("unknown key", it.key());
  }

  bool has(const char* key) const { return j_->contains(key); }

  [[noreturn]] void fail(const std::string& what, const std::string& key = {}) const
  {
    std::string where = path_;
    if (!key.empty()) where += (where.empty() ? "" : ".") + key;
    throw ConfigError(source_ + ": " + (where.empty() ? "<root>" : where) + ": " + what);
  }

  const json& raw(const char* key) const
  {
    if (!has(key)) fail("missing required field", key);
    return (*j_)[key];
  }

  double number(const char* key) const
  {
    const json& v = raw(key);
    if (!v.is_number()) fail("expected a number", key);
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail("must be finite", key);
    return d;
  }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

  std::uint64_t count(const char* key) const
  {
    const json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      fail("expected a non-negative integer", key);
    return v.get<std::uint64_t>();
  }
  std::uint64_t count(const char* key, std::uint64_t fallback) const { return has(key) ? count(key) : fallback; }

  bool flag(const char* key, bool fallback) const
  {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) fail("expected true or false", key);
    return v.get<bool>();
  }

  std::string text(const char* key) const
  {
    const json& v = raw(key);
    if (!v.is_string()) fail("expected a string", key);
    return v.get<std::string>();
  }
  std::string text(const char* key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  Vec3 vec3(const char* key) const
  {
    const json& v = raw(key);
    if (!v.is_array() || v.size() != 3) fail("expected an array of 3 numbers", key);
    Vec3 out;
    for (int a = 0; a < 3; ++a) {
      if (!v[a].is_number()) fail("expected an array of 3 numbers", key);
      out[a] = v[a].get<double>();
      if (!std::isfinite(out[a])) fail("must be finite", key);
    }
    return out;
  }

  std::vector<double> numbers(const char* key) const
  {
    const json& v = raw(key);
    if (!v.is_array()) fail("expected an array of numbers", key);
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail("expected an array of numbers", key);
      out.push_back(e.get<double>());
    }
    return out;
  }

  Fields child(const char* key) const { return Fields(raw(key), join(key), source_); }

  std::vector<Fields> children(const char* key) const
  {
    const json& v = raw(key);
    if (!v.is_array()) fail("expected an array", key);
    std::vector<Fields> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v[i], join(key) + "[" + std::to_string(i) + "]", source_);
    return out;
  }

  const std::string& path() const { return path_; }

private:
  std::string join(const char* key) const { return path_.empty() ? std::string(key) : path_ + "." + key; }

  const json* j_;
  std::string path_;
  std::string source_;
};

inline json parse_json(const std::string& text, const std::string& source)
{
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline std::string read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void check_version(const Fields& f, int expected)
{
  if (!f.has("schema_version")) f.fail("missing required field", "schema_version");
  if (static_cast<int>(f.count("schema_version")) != expected)
    f.fail("unsupported schema version (expected " + std::to_string(expected) + ")", "schema_version");
}

inline TaskPose read_pose(const Fields& f)
{
  f.allow({"position", "yaw"});
  return TaskPose(f.vec3("position"), f.number("yaw", 0.0));
}

template <class Fn>
auto guarded(const Fields& f, const char* key, Fn&& fn)
{
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    f.fail(e.what(), key);
  }
}

inline Obstacle read_obstacle(const Fields& f)
{
  f.allow({"type", "center", "radius", "half_extents", "yaw", "d_stop", "sigma"});
  const std::string type = f.text("type");
  Obstacle o;
  if (type == "sphere") {
    if (f.has("half_extents") || f.has("yaw")) f.fail("sphere takes 'radius' only");
    o = guarded(f, "radius", [&] { return Obstacle::sphere(f.vec3("center"), f.number("radius")); });
  } else if (type == "cuboid") {
    if (f.has("radius")) f.fail("cuboid takes 'half_extents', not 'radius'");
    o = guarded(f, "half_extents",
                [&] { return Obstacle::cuboid(f.vec3("center"), f.vec3("half_extents"), f.number("yaw", 0.0)); });
  } else {
    f.fail("unknown obstacle type '" + type + "' (expected sphere or cuboid)", "type");
  }
  if (f.has("d_stop")) o = guarded(f, "d_stop", [&] { return o.with_d_stop(f.number("d_stop")); });
  if (f.has("sigma")) o = guarded(f, "sigma", [&] { return o.with_sigma(f.number("sigma")); });
  return o;
}

inline PlannerConfig read_planner(const Fields& f)
{
  f.allow({"delta", "n_x", "delta_p", "continuous_cover", "shared_scenarios", "n_iter", "v_min", "v_max", "gamma_tilde",
           "r", "steer_step", "goal_bias", "rewire_radius_factor", "seed"});
  PlannerConfig c;
  c.safety.delta = f.number("delta", c.safety.delta);
  c.safety.n_x = f.count("n_x", c.safety.n_x);
  c.safety.delta_p = f.number("delta_p", c.safety.delta_p);
  c.safety.continuous_cover = f.flag("continuous_cover", c.safety.continuous_cover);
  c.safety.shared_scenarios = f.flag("shared_scenarios", c.safety.shared_scenarios);
  c.n_iter = f.count("n_iter", c.n_iter);
  c.v_min = f.number("v_min", c.v_min);
  c.v_max = f.number("v_max", c.v_max);
  if (f.has("gamma_tilde")) {
    const Fields g = f.child("gamma_tilde");
    g.allow({"knots"});
    const auto& arr = g.raw("knots");
    if (!arr.is_array()) g.fail("expected an array of [speed, bound] pairs", "knots");
    std::vector<TrackingErrorModel::Knot> knots;
    for (const auto& k : arr) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
        g.fail("expected an array of [speed, bound] pairs", "knots");
      knots.push_back({k[0].get<double>(), k[1].get<double>()});
    }
    c.gamma_tilde = guarded(g, "knots", [&] { return TrackingErrorModel(knots); });
  } else {
    c.gamma_tilde = TrackingErrorModel::affine(c.v_max, 0.01);
  }
  c.r = f.number("r", c.r);
  c.steer_step = f.number("steer_step", c.steer_step);
  c.goal_bias = f.number("goal_bias", c.goal_bias);
  c.rewire_radius_factor = f.number("rewire_radius_factor", c.rewire_radius_factor);
  c.seed = f.count("seed", c.seed);
  guarded(f, "", [&] {
    c.validate();
    return 0;
  });
  return c;
}

}  // namespace detail

/// Parses a scene document. `source` names the input in error messages.
inline Scene parse_scene(const std::string& text, const std::string& source = "<scene>")
{
  using namespace detail;
  const json j = parse_json(text, source);
  const Fields root(j, "", source);
  root.allow({"schema_version", "name", "workspace", "robot", "start", "goal", "obstacles", "planner"});
  check_version(root, scene_schema_version);

  Scene s;
  s.name = root.text("name", "unnamed");
  const Fields ws = root.child("workspace");
  ws.allow({"lo", "hi"});
  s.workspace = {ws.vec3("lo"), ws.vec3("hi")};
  if (!s.workspace.valid()) ws.fail("need lo < hi on every axis");

  if (root.has("robot")) {
    const Fields rb = root.child("robot");
    rb.allow({"semi_axes"});
    s.robot = guarded(rb, "semi_axes", [&] { return RobotShape(rb.vec3("semi_axes")); });
  }
  s.start = read_pose(root.child("start"));
  s.goal = read_pose(root.child("goal"));
  if (!s.workspace.contains(s.start.position())) root.fail("start lies outside the workspace", "start");
  if (!s.workspace.contains(s.goal.position())) root.fail("goal lies outside the workspace", "goal");
  if (root.has("obstacles"))
    for (const auto& o : root.children("obstacles")) s.obstacles.push_back(read_obstacle(o));
  if (root.has("planner")) s.planner = read_planner(root.child("planner"));
  return s;
}

inline Scene load_scene(const std::string& path) { return parse_scene(detail::read_text(path), path); }

/// Serialises a scene to the same format (round-trips through parse_scene).
inline std::string dump_scene(const Scene& s)
{
  using detail::json;
  auto v3 = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  auto pose = [&](const TaskPose& p) { return json{{"position", v3(p.position())}, {"yaw", p.yaw()}}; };
  json obs = json::array();
  for (const auto& o : s.obstacles) {
    json e;
    if (const auto* sp = std::get_if<Sphere>(&o.shape)) {
      e = {{"type", "sphere"}, {"center", v3(sp->center)}, {"radius", sp->radius}};
    } else {
      const auto& c = std::get<Cuboid>(o.shape);
      e = {{"type", "cuboid"}, {"center", v3(c.center)}, {"half_extents", v3(c.half_extents)}, {"yaw", c.yaw}};
    }
    if (o.d_stop) e["d_stop"] = *o.d_stop;
    if (o.sigma) e["sigma"] = *o.sigma;
    obs.push_back(e);
  }
  json knots = json::array();
  for (const auto& k : s.planner.gamma_tilde.knots()) knots.push_back(json::array({k.speed, k.bound}));
  const auto& c = s.planner;
  json planner = {{"delta", c.safety.delta},
                  {"n_x", c.safety.n_x},
                  {"delta_p", c.safety.delta_p},
                  {"continuous_cover", c.safety.continuous_cover},
                  {"shared_scenarios", c.safety.shared_scenarios},
                  {"n_iter", c.n_iter},
                  {"v_min", c.v_min},
                  {"v_max", c.v_max},
                  {"gamma_tilde", {{"knots", knots}}},
                  {"r", c.r},
                  {"steer_step", c.steer_step},
                  {"goal_bias", c.goal_bias},
                  {"rewire_radius_factor", c.rewire_radius_factor},
                  {"seed", c.seed}};
  const json j = {{"schema_version", scene_schema_version},
                  {"name", s.name},
                  {"workspace", {{"lo", v3(s.workspace.lo)}, {"hi", v3(s.workspace.hi)}}},
                  {"robot", {{"semi_axes", v3(s.robot.semi_axes())}}},
                  {"start", pose(s.start)},
                  {"goal", pose(s.goal)},
                  {"obstacles", obs},
                  {"planner", planner}};
  return j.dump(2) + "\n";
}

/// Sets every obstacle's uncertainty from one sweep value u: the effective
/// boundary (1 - delta) d_stop equals u, and so does the 2 sigma inflation.
inline Scene with_uncertainty(Scene s, double u)
{
  if (!(u >= 0.0)) throw std::invalid_argument("with_uncertainty: value must be >= 0");
  const double delta = s.planner.safety.delta;
  for (auto& o : s.obstacles) o = o.with_d_stop(u / (1.0 - delta)).with_sigma(u / 2.0);
  return s;
}

/// Spheres of the given radius placed uniformly in the workspace, rejecting
/// centres closer than `clearance` (plus radius) to the start or goal.
inline std::vector<Obstacle> random_spheres(const Bounds& ws, std::size_t count, double radius, const TaskPose& start,
                                            const TaskPose& goal, double clearance, Rng& rng)
{
  std::vector<Obstacle> out;
  out.reserve(count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 1000 * (count + 1)) throw std::runtime_error("random_spheres: cannot place obstacles");
    Vec3 c;
    for (int a = 0; a < 3; ++a) c[a] = rng.uniform(ws.lo[a], ws.hi[a]);
    const double keep_out = radius + clearance;
    if ((c - start.position()).norm() < keep_out || (c - goal.position()).norm() < keep_out) continue;
    out.push_back(Obstacle::sphere(c, radius));
  }
  return out;
}

enum class FieldKind { analytic, raster };

inline FieldKind field_kind_from_string(const std::string& s)
{
  if (s == "analytic") return FieldKind::analytic;
  if (s == "raster") return FieldKind::raster;
  throw std::invalid_argument("unknown field kind '" + s + "' (expected analytic or raster)");
}

/// Field + checker for one method on one scene. The checker may point into
/// the field, so the two travel together.
struct PlanningSetup {
  std::unique_ptr<OccupancyField> field;
  std::unique_ptr<EdgeChecker> checker;
};

inline std::unique_ptr<OccupancyField> make_field(const Scene& s, FieldKind kind, double raster_cell = 0.01)
{
  auto analytic = std::make_unique<AnalyticField>(s.obstacles, s.workspace);
  if (kind == FieldKind::analytic) return analytic;
  return std::make_unique<RasterField>(rasterize(*analytic, raster_cell).with_mode(Interpolation::trilinear));
}

inline PlanningSetup make_setup(const Scene& s, CheckerKind method, FieldKind field_kind = FieldKind::analytic,
                                double raster_cell = 0.01, std::uint64_t scenario_seed = 0)
{
  PlanningSetup out;
  const SampleRegion region = planning_region(s.robot, s.planner.tracking_inflation(), s.planner.safety);
  if (method == CheckerKind::scenario) {
    out.field = make_field(s, field_kind, raster_cell);
    out.checker = std::make_unique<ScenarioChecker>(*out.field, region, s.planner.safety, Rng(scenario_seed));
  } else {
    out.checker = std::make_unique<BaselineChecker>(method, s.obstacles, region, s.planner.safety);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Benchmark campaign description
// ---------------------------------------------------------------------------

enum class SweepVariable { uncertainty, obstacle_count };

struct RandomObstacles {
  double radius = 0.05;
  double uncertainty = 0.05;  ///< sweep-style value applied to every sphere
  double clearance = 0.1;     ///< keep-out distance around start and goal
};

struct BenchmarkSpec {
  std::string name;
  std::string scene_path;  ///< resolved against the spec file's directory
  SweepVariable variable = SweepVariable::uncertainty;
  std::vector<double> values;
  std::vector<CheckerKind> methods;
  std::size_t runs = 100;
  FieldKind field = FieldKind::analytic;
  double raster_cell = 0.01;
  std::size_t K = 101;  ///< poses of the resampled path the cost is evaluated on
  std::size_t l = 200;  ///< velocity-profile intervals (0 disables scheduling)
  std::optional<std::size_t> n_iter, n_x;
  RandomObstacles random;
};

inline BenchmarkSpec parse_spec(const std::string& text, const std::string& source = "<spec>")
{
  using namespace detail;
  const json j = parse_json(text, source);
  const Fields root(j, "", source);
  root.allow({"schema_version", "name", "scene", "sweep", "methods", "runs", "field", "raster_cell", "K", "l",
              "overrides", "random_obstacles"});
  check_version(root, spec_schema_version);
  BenchmarkSpec b;
  b.name = root.text("name", "benchmark");
  const std::filesystem::path base = std::filesystem::path(source).parent_path();
  b.scene_path = (base / root.text("scene")).lexically_normal().string();

  const Fields sw = root.child("sweep");
  sw.allow({"variable", "values"});
  const std::string var = sw.text("variable");
  if (var == "uncertainty") b.variable = SweepVariable::uncertainty;
  else if (var == "obstacle_count") b.variable = SweepVariable::obstacle_count;
  else sw.fail("unknown sweep variable '" + var + "' (expected uncertainty or obstacle_count)", "variable");
  b.values = sw.numbers("values");
  if (b.values.empty()) sw.fail("sweep must not be empty", "values");
  for (double v : b.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) sw.fail("sweep values must be finite and >= 0", "values");
    if (b.variable == SweepVariable::obstacle_count && v != std::floor(v))
      sw.fail("obstacle counts must be integers", "values");
  }

  const auto& m = root.raw("methods");
  if (!m.is_array() || m.empty()) root.fail("expected a non-empty array of method names", "methods");
  for (const auto& e : m) {
    if (!e.is_string()) root.fail("expected a non-empty array of method names", "methods");
    b.methods.push_back(guarded(root, "methods", [&] { return checker_kind_from_string(e.get<std::string>()); }));
  }
  b.runs = root.count("runs", b.runs);
  if (b.runs < 1) root.fail("runs must be >= 1", "runs");
  b.field = guarded(root, "field", [&] { return field_kind_from_string(root.text("field", "analytic")); });
  b.raster_cell = root.number("raster_cell", b.raster_cell);
  if (!(b.raster_cell > 0.0)) root.fail("must be > 0", "raster_cell");
  b.K = root.count("K", b.K);
  if (b.K < 2) root.fail("K must be >= 2", "K");
  b.l = root.count("l", b.l);
  if (root.has("overrides")) {
    const Fields o = root.child("overrides");
    o.allow({"n_iter", "n_x"});
    if (o.has("n_iter")) b.n_iter = o.count("n_iter");
    if (o.has("n_x")) b.n_x = o.count("n_x");
  }
  if (root.has("random_obstacles")) {
    const Fields r = root.child("random_obstacles");
    r.allow({"radius", "uncertainty", "clearance"});
    b.random.radius = r.number("radius", b.random.radius);
    b.random.uncertainty = r.number("uncertainty", b.random.uncertainty);
    b.random.clearance = r.number("clearance", b.random.clearance);
    if (!(b.random.radius > 0.0)) r.fail("must be > 0", "radius");
  }
  return b;
}

inline BenchmarkSpec load_spec(const std::string& path) { return parse_spec(detail::read_text(path), path); }

}  // namespace scc

#endif  // SCC_SCENE_HPP
