#ifndef SCC_VELOCITY_HPP
#define SCC_VELOCITY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "scc/geometry.hpp"
#include "scc/occupancy.hpp"
#include "scc/planner.hpp"
#include "scc/tracking.hpp"

namespace scc {

/// Pose at s in [0, 1] on a path whose K poses sit at s = k / (K - 1).
inline TaskPose pose_at(const std::vector<TaskPose>& path, double s)
{
  if (path.empty()) throw std::invalid_argument("pose_at: empty path");
  if (path.size() == 1 || s <= 0.0) return path.front();
  if (s >= 1.0) return path.back();
  const double u = s * static_cast<double>(path.size() - 1);
  const auto i = std::min(static_cast<std::size_t>(u), path.size() - 2);
  return interpolate(path[i], path[i + 1], u - static_cast<double>(i));
}

struct UnsafeDistanceConfig {
  double delta = 0.05;
  double pitch = 5e-3;      ///< grid pitch of candidate unsafe points [m]
  double saturation = 0.01; ///< gamma(v_max); larger clearances cannot raise v*
};

class PreconditionError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Distance from R(pose) to the nearest point with p_free < 1 - delta,
/// approximated over a world-aligned grid of candidate points in the box
/// around R(pose) grown by the saturation distance plus one pitch. Returns
/// `saturation` when no candidate in the box is unsafe.
/// Throws PreconditionError if the region centre itself is unsafe.
inline double unsafe_distance(const OccupancyField& field, const TaskPose& pose, const RobotShape& shape,
                              const UnsafeDistanceConfig& cfg)
{
  if (!(cfg.pitch > 0.0)) throw std::invalid_argument("unsafe_distance: pitch must be > 0");
  const double threshold = 1.0 - cfg.delta;
  if (field.p_free(pose.position()) < threshold)
    throw PreconditionError("unsafe_distance: pose is not delta-safe");

  const double margin = cfg.saturation + cfg.pitch;
  const Vec3 half = region_aabb_half_extents(SampleRegion(shape, margin), pose.yaw());
  const Vec3 lo = pose.position() - half, hi = pose.position() + half;
  std::array<long, 3> i0{}, i1{};
  for (int a = 0; a < 3; ++a) {
    i0[a] = static_cast<long>(std::floor(lo[a] / cfg.pitch));
    i1[a] = static_cast<long>(std::ceil(hi[a] / cfg.pitch));
  }

  const double enclosing = shape.enclosing_radius();
  double best = cfg.saturation;
  for (long k = i0[2]; k <= i1[2]; ++k)
    for (long j = i0[1]; j <= i1[1]; ++j)
      for (long i = i0[0]; i <= i1[0]; ++i) {
        const Vec3 x(static_cast<double>(i) * cfg.pitch, static_cast<double>(j) * cfg.pitch,
                     static_cast<double>(k) * cfg.pitch);
        // Cheap lower bound through the enclosing sphere.
        if ((x - pose.position()).norm() - enclosing >= best) continue;
        if (field.p_free(x) >= threshold) continue;
        best = std::min(best, distance_point_to_region(x, pose, shape));
        if (best == 0.0) return 0.0;
      }
  return best;
}

inline double unsafe_distance(const OccupancyField& field, const std::vector<TaskPose>& path, double s,
                              const RobotShape& shape, const UnsafeDistanceConfig& cfg)
{
  return unsafe_distance(field, pose_at(path, s), shape, cfg);
}

/// Largest speed v <= v_max with gamma(v) <= d_o.
inline double max_velocity(double d_o, const TrackingErrorModel& gamma, double v_max)
{
  if (!(d_o >= 0.0)) throw std::invalid_argument("max_velocity: d_o must be >= 0");
  return gamma.max_speed_within(d_o, v_max);
}

struct ScheduleConfig {
  double delta = 0.05;
  double v_min = 0.01;
  double v_max = 0.2;
  TrackingErrorModel gamma_tilde = TrackingErrorModel::affine(0.2, 0.01);
  double pitch = 5e-3;

  static ScheduleConfig from(const PlannerConfig& p, double pitch = 5e-3)
  {
    return {p.safety.delta, p.v_min, p.v_max, p.gamma_tilde, pitch};
  }
};

struct VelocityProfile {
  std::vector<double> s;
  std::vector<double> v;    ///< v*(s) [m/s]
  std::vector<double> d_o;  ///< [m]
  std::vector<std::size_t> below_v_min;  ///< samples where gamma(v_min) > d_o
};

/// d_o and v* at l + 1 evenly spaced values of s.
inline VelocityProfile schedule(const OccupancyField& field, const std::vector<TaskPose>& path, const RobotShape& shape,
                                const ScheduleConfig& cfg, std::size_t l)
{
  if (l < 1) throw std::invalid_argument("schedule: l must be >= 1");
  const UnsafeDistanceConfig ucfg{cfg.delta, cfg.pitch, cfg.gamma_tilde(cfg.v_max)};
  const double gamma_min = cfg.gamma_tilde(cfg.v_min);
  VelocityProfile prof;
  prof.s.resize(l + 1);
  prof.v.resize(l + 1);
  prof.d_o.resize(l + 1);
  for (std::size_t i = 0; i <= l; ++i) {
    const double s = static_cast<double>(i) / static_cast<double>(l);
    const double d = unsafe_distance(field, path, s, shape, ucfg);
    double v = max_velocity(d, cfg.gamma_tilde, cfg.v_max);
    if (v < cfg.v_min) {
      if (gamma_min <= d) v = cfg.v_min;
      else prof.below_v_min.push_back(i);
    }
    prof.s[i] = s;
    prof.d_o[i] = d;
    prof.v[i] = v;
  }
  return prof;
}

struct Trajectory {
  std::vector<double> t;
  std::vector<TaskPose> poses;
  std::vector<double> v;  ///< scheduled speed at each knot

  double duration() const { return t.empty() ? 0.0 : t.back(); }
};

class StallError : public std::runtime_error {
public:
  StallError(double s0, double s1)
      : std::runtime_error("time_parameterize: zero velocity on s-interval [" + std::to_string(s0) + ", " +
                           std::to_string(s1) + "]"),
        s_begin(s0), s_end(s1)
  {
  }
  double s_begin, s_end;
};

/// Integrates dt = |pi'(s)| ds / v over each s-interval, using the smaller of
/// the two adjacent v* samples on the interval. |pi'(s)| is the position length
/// of the (arc-length-uniform) path.
inline Trajectory time_parameterize(const std::vector<TaskPose>& path, const VelocityProfile& profile)
{
  if (profile.s.size() < 2) throw std::invalid_argument("time_parameterize: profile needs >= 2 samples");
  const double speed_factor = position_length(path);
  if (!(speed_factor > 0.0)) throw std::invalid_argument("time_parameterize: path has zero length");
  Trajectory traj;
  const std::size_t n = profile.s.size();
  traj.t.resize(n);
  traj.poses.resize(n);
  traj.v = profile.v;
  traj.t[0] = 0.0;
  traj.poses[0] = pose_at(path, profile.s[0]);
  for (std::size_t i = 1; i < n; ++i) {
    const double ds = profile.s[i] - profile.s[i - 1];
    const double v = std::min(profile.v[i - 1], profile.v[i]);
    if (!(v > 0.0)) throw StallError(profile.s[i - 1], profile.s[i]);
    traj.t[i] = traj.t[i - 1] + speed_factor * ds / v;
    traj.poses[i] = pose_at(path, profile.s[i]);
  }
  return traj;
}

}  // namespace scc

#endif  // SCC_VELOCITY_HPP
