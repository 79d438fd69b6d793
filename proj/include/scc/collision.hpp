#ifndef SCC_COLLISION_HPP
#define SCC_COLLISION_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "scc/geometry.hpp"
#include "scc/occupancy.hpp"
#include "scc/random.hpp"

namespace scc {

/// Parameters of the delta-safety checks.
struct SafetyConfig {
  double delta = 0.05;       ///< admissible occupancy probability
  std::size_t n_x = 100;     ///< scenario samples per pose
  double delta_p = 0.02;     ///< spacing of checked poses along a segment [m]
  bool continuous_cover = false;  ///< grow the sample region by delta_p / 2
  bool shared_scenarios = false;  ///< reuse one scenario set for every pose

  void validate() const
  {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("SafetyConfig: delta must lie in (0,1)");
    if (n_x < 1) throw std::invalid_argument("SafetyConfig: n_x must be >= 1");
    if (!(delta_p > 0.0)) throw std::invalid_argument("SafetyConfig: delta_p must be > 0");
  }

  /// Extra inflation that covers the gap between consecutive checked poses.
  double cover_radius() const { return continuous_cover ? 0.5 * delta_p : 0.0; }
};

/// Sample region for planning: R0 ⊕ B(gamma(v_min) + cover radius).
inline SampleRegion planning_region(const RobotShape& shape, double tracking_inflation, const SafetyConfig& cfg)
{
  return SampleRegion(shape, tracking_inflation + cfg.cover_radius());
}

/// Number of sub-steps used to discretise [p1, p2]. Each step moves any point
/// of a body of radius `sweep_radius` by at most delta_p.
inline std::size_t segment_steps(const TaskPose& p1, const TaskPose& p2, double sweep_radius, double delta_p)
{
  const double travel = (p2.position() - p1.position()).norm() + sweep_radius * std::abs(angle_diff(p2.yaw(), p1.yaw()));
  return static_cast<std::size_t>(std::ceil(travel / delta_p));
}

/// Calls `check(pose)` on the poses p^(i), i = 0..n, spaced evenly along the
/// segment (both endpoints included). Stops at the first failing pose.
template <class PoseCheck>
bool all_segment_poses(const TaskPose& p1, const TaskPose& p2, double sweep_radius, double delta_p, PoseCheck&& check)
{
  const std::size_t n = segment_steps(p1, p2, sweep_radius, delta_p);
  if (n == 0) return check(p1);
  for (std::size_t i = 0; i <= n; ++i) {
    const TaskPose p = interpolate(p1, p2, static_cast<double>(i) / static_cast<double>(n));
    if (!check(p)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Scenario check
// ---------------------------------------------------------------------------

/// True iff every transformed scenario point has p_free >= 1 - delta.
inline bool points_are_delta_safe(const OccupancyField& field, const TaskPose& p, std::span<const Vec3> local_points,
                                  double delta)
{
  const double threshold = 1.0 - delta;
  for (const Vec3& x0 : local_points)
    if (field.p_free(apply_rigid_motion(p, x0)) < threshold) return false;
  return true;
}

/// Draws n_x fresh samples from `region` and checks them at pose p.
inline bool pose_is_delta_safe(const OccupancyField& field, const TaskPose& p, const SampleRegion& region,
                               const SafetyConfig& cfg, Rng& rng)
{
  thread_local std::vector<Vec3> samples;
  samples.clear();
  sample_region_uniform(region, cfg.n_x, rng, samples);
  return points_are_delta_safe(field, p, samples, cfg.delta);
}

inline bool segment_is_delta_safe(const OccupancyField& field, const TaskPose& p1, const TaskPose& p2,
                                  const SampleRegion& region, const SafetyConfig& cfg, Rng& rng)
{
  return all_segment_poses(p1, p2, region.enclosing_radius(), cfg.delta_p,
                           [&](const TaskPose& p) { return pose_is_delta_safe(field, p, region, cfg, rng); });
}

/// Same as above with one fixed scenario set reused for every pose.
inline bool segment_is_delta_safe(const OccupancyField& field, const TaskPose& p1, const TaskPose& p2,
                                  const SampleRegion& region, const SafetyConfig& cfg,
                                  std::span<const Vec3> scenarios)
{
  return all_segment_poses(p1, p2, region.enclosing_radius(), cfg.delta_p, [&](const TaskPose& p) {
    return points_are_delta_safe(field, p, scenarios, cfg.delta);
  });
}

// ---------------------------------------------------------------------------
// Parametric baselines: obstacles with Gaussian position uncertainty
// N(x_hat, sigma^2 I). The robot region is over-approximated by its enclosing
// sphere, so each test only needs the region centre.
// ---------------------------------------------------------------------------

inline double obstacle_sigma(const Obstacle& o)
{
  if (!o.sigma) throw std::invalid_argument("baseline check: obstacle without sigma");
  return *o.sigma;
}

/// Gap between the region's enclosing sphere and the nominal obstacle surface.
inline double enclosing_clearance(const Vec3& center, double radius, const Obstacle& o)
{
  return distance_point_to_obstacle(center, o) - radius;
}

/// Standard-normal quantile.
inline double normal_quantile(double p)
{
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

/// Bounding volume: the obstacle is inflated by 2 sigma and treated as
/// deterministic.
inline bool bounding_volume_pose_safe(std::span<const Obstacle> obstacles, const Vec3& center, double radius)
{
  for (const auto& o : obstacles)
    if (enclosing_clearance(center, radius, o) < 2.0 * obstacle_sigma(o)) return false;
  return true;
}

/// Clearance of at least sigma * z for every obstacle.
inline bool quantile_clearance_safe(std::span<const Obstacle> obstacles, const Vec3& center, double radius, double z)
{
  for (const auto& o : obstacles)
    if (enclosing_clearance(center, radius, o) < obstacle_sigma(o) * z) return false;
  return true;
}

/// Gaussian tail bound per obstacle: clearance >= sigma * z(1 - delta).
inline bool chance_constraint_pose_safe(std::span<const Obstacle> obstacles, const Vec3& center, double radius,
                                        double delta)
{
  return quantile_clearance_safe(obstacles, center, radius, normal_quantile(1.0 - delta));
}

/// Upper bound on the collision probability with one obstacle: the volume of
/// the set of obstacle positions that collide (nominal shape ⊕ enclosing
/// sphere) times the largest Gaussian density over that set.
inline double max_probability_bound(const Obstacle& o, const Vec3& center, double radius)
{
  const double sigma = obstacle_sigma(o);
  const double gap = std::max(0.0, enclosing_clearance(center, radius, o));
  if (sigma == 0.0) return gap > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  const double volume = obstacle_minkowski_volume(o, radius);
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -1.5);
  return volume * norm * std::exp(-gap * gap / (2.0 * sigma * sigma));
}

inline bool max_probability_pose_safe(std::span<const Obstacle> obstacles, const Vec3& center, double radius,
                                      double delta)
{
  for (const auto& o : obstacles) {
    if (obstacle_sigma(o) == 0.0) {
      if (enclosing_clearance(center, radius, o) < 0.0) return false;
    } else if (max_probability_bound(o, center, radius) > delta) {
      return false;
    }
  }
  return true;
}

inline bool baseline_bounding_volume(std::span<const Obstacle> obstacles, const TaskPose& p1, const TaskPose& p2,
                                     const SampleRegion& region, const SafetyConfig& cfg)
{
  const double radius = region.enclosing_radius();
  return all_segment_poses(p1, p2, radius, cfg.delta_p, [&](const TaskPose& p) {
    return bounding_volume_pose_safe(obstacles, p.position(), radius);
  });
}

inline bool baseline_chance_constraint(std::span<const Obstacle> obstacles, const TaskPose& p1, const TaskPose& p2,
                                       const SampleRegion& region, const SafetyConfig& cfg)
{
  const double radius = region.enclosing_radius();
  const double z = normal_quantile(1.0 - cfg.delta);
  return all_segment_poses(p1, p2, radius, cfg.delta_p, [&](const TaskPose& p) {
    return quantile_clearance_safe(obstacles, p.position(), radius, z);
  });
}

inline bool baseline_max_prob(std::span<const Obstacle> obstacles, const TaskPose& p1, const TaskPose& p2,
                              const SampleRegion& region, const SafetyConfig& cfg)
{
  const double radius = region.enclosing_radius();
  return all_segment_poses(p1, p2, radius, cfg.delta_p, [&](const TaskPose& p) {
    return max_probability_pose_safe(obstacles, p.position(), radius, cfg.delta);
  });
}

// ---------------------------------------------------------------------------
// Checker objects used by the planner
// ---------------------------------------------------------------------------

enum class CheckerKind { scenario, bounding_volume, chance_constraint, max_prob };

inline std::string_view to_string(CheckerKind k)
{
  switch (k) {
    case CheckerKind::scenario: return "scenario";
    case CheckerKind::bounding_volume: return "bounding_volume";
    case CheckerKind::chance_constraint: return "chance_constraint";
    case CheckerKind::max_prob: return "max_prob";
  }
  return "unknown";
}

inline CheckerKind checker_kind_from_string(std::string_view s)
{
  for (auto k : {CheckerKind::scenario, CheckerKind::bounding_volume, CheckerKind::chance_constraint, CheckerKind::max_prob})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown checker '" + std::string(s) + "'");
}

/// Pose and segment validity for the tree search. Implementations are
/// immutable; randomness comes from the caller's stream.
class EdgeChecker {
public:
  virtual ~EdgeChecker() = default;
  virtual bool pose_safe(const TaskPose& p, Rng& rng) const = 0;
  virtual bool segment_safe(const TaskPose& p1, const TaskPose& p2, Rng& rng) const = 0;
  virtual CheckerKind kind() const = 0;
  virtual const SampleRegion& region() const = 0;
  virtual const SafetyConfig& config() const = 0;
};

class ScenarioChecker final : public EdgeChecker {
public:
  /// In shared-scenario mode the sample set is drawn once from `scenario_rng`.
  ScenarioChecker(const OccupancyField& field, SampleRegion region, SafetyConfig cfg, Rng scenario_rng = Rng(0))
      : field_(&field), region_(std::move(region)), cfg_(cfg)
  {
    cfg_.validate();
    if (cfg_.shared_scenarios) scenarios_ = sample_region_uniform(region_, cfg_.n_x, scenario_rng);
  }

  bool pose_safe(const TaskPose& p, Rng& rng) const override
  {
    if (cfg_.shared_scenarios) return points_are_delta_safe(*field_, p, scenarios_, cfg_.delta);
    return pose_is_delta_safe(*field_, p, region_, cfg_, rng);
  }
  bool segment_safe(const TaskPose& p1, const TaskPose& p2, Rng& rng) const override
  {
    if (cfg_.shared_scenarios) return segment_is_delta_safe(*field_, p1, p2, region_, cfg_, std::span<const Vec3>(scenarios_));
    return segment_is_delta_safe(*field_, p1, p2, region_, cfg_, rng);
  }
  CheckerKind kind() const override { return CheckerKind::scenario; }
  const SampleRegion& region() const override { return region_; }
  const SafetyConfig& config() const override { return cfg_; }
  const OccupancyField& field() const { return *field_; }

private:
  const OccupancyField* field_;
  SampleRegion region_;
  SafetyConfig cfg_;
  std::vector<Vec3> scenarios_;
};

class BaselineChecker final : public EdgeChecker {
public:
  BaselineChecker(CheckerKind kind, std::vector<Obstacle> obstacles, SampleRegion region, SafetyConfig cfg)
      : kind_(kind), obstacles_(std::move(obstacles)), region_(std::move(region)), cfg_(cfg),
        z_(normal_quantile(1.0 - cfg.delta))
  {
    if (kind_ == CheckerKind::scenario) throw std::invalid_argument("BaselineChecker: scenario is not a baseline");
    cfg_.validate();
    for (const auto& o : obstacles_) obstacle_sigma(o);
  }

  bool pose_safe(const TaskPose& p, Rng&) const override
  {
    const double radius = region_.enclosing_radius();
    switch (kind_) {
      case CheckerKind::bounding_volume: return bounding_volume_pose_safe(obstacles_, p.position(), radius);
      case CheckerKind::chance_constraint: return quantile_clearance_safe(obstacles_, p.position(), radius, z_);
      case CheckerKind::max_prob: return max_probability_pose_safe(obstacles_, p.position(), radius, cfg_.delta);
      case CheckerKind::scenario: break;
    }
    return false;
  }
  bool segment_safe(const TaskPose& p1, const TaskPose& p2, Rng& rng) const override
  {
    return all_segment_poses(p1, p2, region_.enclosing_radius(), cfg_.delta_p,
                             [&](const TaskPose& p) { return pose_safe(p, rng); });
  }
  CheckerKind kind() const override { return kind_; }
  const SampleRegion& region() const override { return region_; }
  const SafetyConfig& config() const override { return cfg_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }

private:
  CheckerKind kind_;
  std::vector<Obstacle> obstacles_;
  SampleRegion region_;
  SafetyConfig cfg_;
  double z_;
};

}  // namespace scc

#endif  // SCC_COLLISION_HPP
