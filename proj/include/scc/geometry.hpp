#ifndef SCC_GEOMETRY_HPP
#define SCC_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "scc/random.hpp"

namespace scc {

using Vec3 = Eigen::Vector3d;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a)
{
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (!(std::abs(a) < two_pi)) a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

/// Shortest signed rotation taking `from` onto `to`.
inline double angle_diff(double to, double from) { return wrap_angle(to - from); }

/// Position plus yaw about the vertical axis. The yaw is always kept wrapped.
class TaskPose {
public:
  TaskPose() = default;
  TaskPose(const Vec3& position, double yaw) : x_(position), phi_(wrap_angle(yaw))
  {
    if (!x_.allFinite() || !std::isfinite(yaw))
      throw std::invalid_argument("TaskPose: non-finite component");
  }
  TaskPose(double x, double y, double z, double yaw) : TaskPose(Vec3(x, y, z), yaw) {}

  const Vec3& position() const { return x_; }
  double yaw() const { return phi_; }

  bool operator==(const TaskPose& o) const { return x_ == o.x_ && phi_ == o.phi_; }

private:
  Vec3 x_ = Vec3::Zero();
  double phi_ = 0.0;
};

/// Linear interpolation in position, shortest-arc interpolation in yaw.
inline TaskPose interpolate(const TaskPose& a, const TaskPose& b, double t)
{
  if (t <= 0.0) return a;
  if (t >= 1.0) return b;
  return {a.position() + t * (b.position() - a.position()), a.yaw() + t * angle_diff(b.yaw(), a.yaw())};
}

inline Vec3 rotate_yaw(const Vec3& v, double yaw)
{
  const double c = std::cos(yaw), s = std::sin(yaw);
  return {c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()};
}

/// T^p(x0): rotate about z by the pose yaw, then translate by the pose position.
inline Vec3 apply_rigid_motion(const TaskPose& p, const Vec3& x0)
{
  return rotate_yaw(x0, p.yaw()) + p.position();
}

/// Inverse of apply_rigid_motion: world point into the pose frame.
inline Vec3 to_pose_frame(const TaskPose& p, const Vec3& x)
{
  return rotate_yaw(x - p.position(), -p.yaw());
}

// ---------------------------------------------------------------------------
// Ellipsoid helpers
// ---------------------------------------------------------------------------

/// Euclidean distance from `q` to the solid axis-aligned ellipsoid centred at
/// the origin. Zero inside. Outside points are projected by bracketed
/// bisection on the Lagrange multiplier t of the closest-point condition
///   x_i = a_i^2 q_i / (t + a_i^2),  sum (x_i / a_i)^2 = 1.
inline double distance_to_ellipsoid(const Vec3& q, const Vec3& axes)
{
  const Vec3 y = q.cwiseAbs();
  double level = 0.0;
  for (int i = 0; i < 3; ++i) level += (y[i] / axes[i]) * (y[i] / axes[i]);
  if (level <= 1.0) return 0.0;

  auto F = [&](double t) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double r = axes[i] * y[i] / (t + axes[i] * axes[i]);
      s += r * r;
    }
    return s - 1.0;
  };
  // F(0) > 0 outside; F(t_hi) <= 0 for t_hi = max(a) * |y|.
  double lo = 0.0;
  double hi = axes.maxCoeff() * y.norm();
  for (int it = 0; it < 100 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (F(mid) > 0.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  Vec3 x;
  for (int i = 0; i < 3; ++i) x[i] = axes[i] * axes[i] * y[i] / (t + axes[i] * axes[i]);
  return (y - x).norm();
}

inline double ellipsoid_volume(const Vec3& axes)
{
  return 4.0 / 3.0 * std::numbers::pi * axes.prod();
}

/// The robot reference region R0: a solid ellipsoid centred at the origin,
/// axis-aligned in the pose frame. A flat ellipse parallel to the x-y plane is
/// modelled with a small vertical semi-axis.
class RobotShape {
public:
  RobotShape() : RobotShape(Vec3(0.1, 0.1, 0.01)) {}
  explicit RobotShape(const Vec3& semi_axes) : axes_(semi_axes)
  {
    if (!(axes_.array() > 0.0).all() || !axes_.allFinite())
      throw std::invalid_argument("RobotShape: semi-axes must be strictly positive");
  }
  static RobotShape ellipsoid(double a, double b, double c) { return RobotShape(Vec3(a, b, c)); }

  const Vec3& semi_axes() const { return axes_; }
  double enclosing_radius() const { return axes_.maxCoeff(); }
  bool contains(const Vec3& x0) const { return x0.cwiseQuotient(axes_).squaredNorm() <= 1.0; }

private:
  Vec3 axes_;
};

/// R0 ⊕ B(inflation).
struct SampleRegion {
  RobotShape shape;
  double inflation = 0.0;

  SampleRegion() = default;
  SampleRegion(RobotShape s, double infl) : shape(std::move(s)), inflation(infl)
  {
    if (!(inflation >= 0.0) || !std::isfinite(inflation))
      throw std::invalid_argument("SampleRegion: inflation must be >= 0");
  }

  bool contains(const Vec3& x0) const
  {
    const Vec3& a = shape.semi_axes();
    auto level = [&](const Vec3& axes) { return (x0.cwiseQuotient(axes)).squaredNorm(); };
    if (level(a) <= 1.0) return true;
    if (inflation == 0.0) return false;
    // E(a + r) ⊆ E(a) ⊕ B(r) ⊆ E(a (1 + r / min a)).
    if (level(a.array() + inflation) <= 1.0) return true;
    if (level(a * (1.0 + inflation / a.minCoeff())) > 1.0) return false;
    return distance_to_ellipsoid(x0, a) <= inflation;
  }
  double enclosing_radius() const { return shape.enclosing_radius() + inflation; }
  Vec3 half_extents() const { return shape.semi_axes().array() + inflation; }
};

class DegenerateRegionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Appends `n` points drawn uniformly from the region by rejection sampling
/// from its bounding box.
inline void sample_region_uniform(const SampleRegion& region, std::size_t n, Rng& rng,
                                  std::vector<Vec3>& out)
{
  if (n == 0) throw std::invalid_argument("sample_region_uniform: n must be >= 1");
  constexpr double min_acceptance = 1e-4;
  constexpr std::size_t min_attempts = 100000;
  const Vec3 h = region.half_extents();
  std::size_t accepted = 0, attempts = 0;
  out.reserve(out.size() + n);
  while (accepted < n) {
    const Vec3 c(rng.uniform(-h.x(), h.x()), rng.uniform(-h.y(), h.y()), rng.uniform(-h.z(), h.z()));
    ++attempts;
    if (region.contains(c)) {
      out.push_back(c);
      ++accepted;
    } else if (attempts >= min_attempts &&
               static_cast<double>(accepted) < min_acceptance * static_cast<double>(attempts)) {
      throw DegenerateRegionError("sample_region_uniform: acceptance rate below 1e-4");
    }
  }
}

inline std::vector<Vec3> sample_region_uniform(const SampleRegion& region, std::size_t n, Rng& rng)
{
  std::vector<Vec3> out;
  sample_region_uniform(region, n, rng, out);
  return out;
}

/// Distance from a world point to R(p) = T^p(R0). Zero inside.
inline double distance_point_to_region(const Vec3& x, const TaskPose& p, const RobotShape& shape)
{
  return distance_to_ellipsoid(to_pose_frame(p, x), shape.semi_axes());
}

/// World-frame axis-aligned half extents of R(p) ⊕ B(inflation).
inline Vec3 region_aabb_half_extents(const SampleRegion& region, double yaw)
{
  const Vec3& a = region.shape.semi_axes();
  const double c = std::abs(std::cos(yaw)), s = std::abs(std::sin(yaw));
  // Support function of the rotated ellipse along x and y.
  return Vec3(std::hypot(a.x() * c, a.y() * s), std::hypot(a.x() * s, a.y() * c), a.z()).array() +
         region.inflation;
}

// ---------------------------------------------------------------------------
// Obstacles
// ---------------------------------------------------------------------------

struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
};

struct Cuboid {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.1);
  double yaw = 0.0;
};

/// An obstacle primitive with the uncertainty parameters of the backends that
/// consume it: `d_stop` for the linear-decay occupancy model, `sigma` for the
/// Gaussian position models.
struct Obstacle {
  std::variant<Sphere, Cuboid> shape;
  std::optional<double> d_stop;
  std::optional<double> sigma;

  static Obstacle sphere(const Vec3& c, double r)
  {
    if (!(r > 0.0)) throw std::invalid_argument("sphere radius must be positive");
    return Obstacle{Sphere{c, r}, std::nullopt, std::nullopt};
  }
  static Obstacle cuboid(const Vec3& c, const Vec3& half, double yaw = 0.0)
  {
    if (!(half.array() > 0.0).all()) throw std::invalid_argument("cuboid half extents must be positive");
    return Obstacle{Cuboid{c, half, wrap_angle(yaw)}, std::nullopt, std::nullopt};
  }
  Obstacle with_d_stop(double d) const
  {
    if (!(d >= 0.0)) throw std::invalid_argument("d_stop must be >= 0");
    Obstacle o = *this;
    o.d_stop = d;
    return o;
  }
  Obstacle with_sigma(double s) const
  {
    if (!(s >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
    Obstacle o = *this;
    o.sigma = s;
    return o;
  }

  const Vec3& center() const
  {
    return std::visit([](const auto& s) -> const Vec3& { return s.center; }, shape);
  }
  double enclosing_radius() const
  {
    if (const auto* s = std::get_if<Sphere>(&shape)) return s->radius;
    return std::get<Cuboid>(shape).half_extents.norm();
  }
};

/// Signed distance to the obstacle surface; negative inside.
inline double distance_point_to_obstacle(const Vec3& x, const Obstacle& o)
{
  if (const auto* s = std::get_if<Sphere>(&o.shape)) return (x - s->center).norm() - s->radius;
  const auto& c = std::get<Cuboid>(o.shape);
  const Vec3 q = rotate_yaw(x - c.center, -c.yaw).cwiseAbs() - c.half_extents;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside;
}

/// Volume of the obstacle's nominal shape grown by a ball of radius r
/// (Steiner formula for the box case).
inline double obstacle_minkowski_volume(const Obstacle& o, double r)
{
  if (const auto* s = std::get_if<Sphere>(&o.shape)) {
    const double R = s->radius + r;
    return 4.0 / 3.0 * std::numbers::pi * R * R * R;
  }
  const Vec3& h = std::get<Cuboid>(o.shape).half_extents;
  const double a = h.x(), b = h.y(), c = h.z();
  return 8.0 * a * b * c + 8.0 * r * (a * b + b * c + c * a) +
         2.0 * std::numbers::pi * r * r * (a + b + c) + 4.0 / 3.0 * std::numbers::pi * r * r * r;
}

/// Axis-aligned box.
struct Bounds {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  bool contains(const Vec3& x) const
  {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  Vec3 extent() const { return hi - lo; }
  double volume() const { return extent().prod(); }
  double diagonal() const { return extent().norm(); }
  bool valid() const { return lo.allFinite() && hi.allFinite() && (hi.array() > lo.array()).all(); }
};

}  // namespace scc

#endif  // SCC_GEOMETRY_HPP
