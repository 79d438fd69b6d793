#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "scc/collision.hpp"

namespace scc {
namespace {

const Bounds box{Vec3(-2, -2, -2), Vec3(2, 2, 2)};

SafetyConfig cfg_with(std::size_t n_x, double delta = 0.05)
{
  SafetyConfig c;
  c.n_x = n_x;
  c.delta = delta;
  return c;
}

AnalyticField unit_sphere_field()
{
  return AnalyticField({Obstacle::sphere(Vec3::Zero(), 0.2).with_d_stop(0.1)}, box);
}

// Tiny ellipsoid standing in for a point-like region.
const SampleRegion point_region(RobotShape::ellipsoid(1e-7, 1e-7, 1e-7), 0.0);

TEST(PoseCheck, EmptySceneIsSafe)
{
  const AnalyticField empty({}, box);
  Rng rng(1);
  const SampleRegion region(RobotShape(), 0.01);
  for (int k = 0; k < 20; ++k)
    EXPECT_TRUE(pose_is_delta_safe(empty, TaskPose(Vec3(rng.uniform(-1, 1), 0, 0), rng.uniform(-3, 3)), region,
                                   cfg_with(100), rng));
}

TEST(PoseCheck, InteriorRegionIsUnsafe)
{
  Rng rng(2);
  const SampleRegion region(RobotShape::ellipsoid(0.05, 0.05, 0.05), 0.0);
  EXPECT_FALSE(pose_is_delta_safe(unit_sphere_field(), TaskPose(Vec3::Zero(), 0), region, cfg_with(100), rng));
  EXPECT_FALSE(pose_is_delta_safe(unit_sphere_field(), TaskPose(Vec3::Zero(), 0), region, cfg_with(1), rng));
}

TEST(PoseCheck, ThresholdSurfaceWithSphericalRegion)
{
  const SampleRegion region(RobotShape::ellipsoid(0.05, 0.05, 0.05), 0.0);
  const auto f = unit_sphere_field();
  Rng rng(3);
  // Nearest region point exactly on the 0.095 surface: every sample is safe.
  for (int k = 0; k < 50; ++k)
    EXPECT_TRUE(pose_is_delta_safe(f, TaskPose(Vec3(0.25 + 0.095, 0, 0), 0), region, cfg_with(100), rng));
  // 0.01 inside the surface: a cap of the region is unsafe and is hit at large N_x.
  EXPECT_FALSE(pose_is_delta_safe(f, TaskPose(Vec3(0.25 + 0.085, 0, 0), 0), region, cfg_with(10000), rng));
}

TEST(PoseCheck, BoundaryValueCountsAsSafe)
{
  const RasterField r = RasterField::filled(Vec3(-1, -1, -1), 0.5, {4, 4, 4}, 0.75f);
  const std::vector<Vec3> pts{Vec3::Zero()};
  EXPECT_TRUE(points_are_delta_safe(r, TaskPose(), pts, 0.25));
  EXPECT_FALSE(points_are_delta_safe(r, TaskPose(), pts, 0.2499));
}

TEST(PoseCheck, MonotoneInDeltaWithSameSamples)
{
  const AnalyticField f({Obstacle::sphere(Vec3::Zero(), 0.2).with_d_stop(0.3)}, box);
  Rng rng(4);
  const SampleRegion region(RobotShape(), 0.01);
  for (int k = 0; k < 300; ++k) {
    const auto pts = sample_region_uniform(region, 50, rng);
    const TaskPose p(Vec3(rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7), rng.uniform(-0.1, 0.1)), rng.uniform(-3, 3));
    const double d1 = rng.uniform(0.01, 0.9), d2 = rng.uniform(d1, 0.99);
    if (points_are_delta_safe(f, p, pts, d1)) {
      EXPECT_TRUE(points_are_delta_safe(f, p, pts, d2));
    }
  }
}

TEST(PoseCheck, MonotoneInInflation)
{
  // The larger region's sample set restricted to the smaller region is a
  // valid sample set for the smaller region.
  const AnalyticField f({Obstacle::cuboid(Vec3::Zero(), Vec3(0.2, 0.1, 0.1), 0.3).with_d_stop(0.1)}, box);
  Rng rng(5);
  const SampleRegion small(RobotShape(), 0.005), large(RobotShape(), 0.05);
  int small_unsafe = 0;
  for (int k = 0; k < 300; ++k) {
    const auto big = sample_region_uniform(large, 400, rng);
    std::vector<Vec3> sub;
    for (const Vec3& x : big)
      if (small.contains(x)) sub.push_back(x);
    const TaskPose p(Vec3(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), 0.0), rng.uniform(-3, 3));
    if (!points_are_delta_safe(f, p, sub, 0.05)) {
      ++small_unsafe;
      EXPECT_FALSE(points_are_delta_safe(f, p, big, 0.05));
    }
  }
  EXPECT_GT(small_unsafe, 10);
}

TEST(PoseCheck, ConvergesToRegionIndicator)
{
  // For a single sphere the minimum of p_free over the region is attained at
  // the region point closest to the sphere, so the limit decision is
  // dist(region, sphere) >= 0.95 d_stop.
  const auto f = unit_sphere_field();
  const RobotShape shape = RobotShape::ellipsoid(0.1, 0.05, 0.02);
  const SampleRegion region(shape, 0.005);
  Rng rng(6);
  int agree = 0, total = 0;
  for (int k = 0; k < 200; ++k) {
    Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    dir.normalize();
    const TaskPose p(dir * rng.uniform(0.25, 0.5), rng.uniform(-3, 3));
    const double clearance = distance_point_to_region(Vec3::Zero(), p, shape) - 0.005 - 0.2;
    if (std::abs(clearance - 0.095) < 2e-3) continue;
    const bool expected = clearance >= 0.095;
    ++total;
    agree += pose_is_delta_safe(f, p, region, cfg_with(5000), rng) == expected;
  }
  EXPECT_GE(agree, total * 99 / 100);
  EXPECT_GT(total, 150);
}

TEST(SegmentCheck, DegenerateSegmentIsPoseCheck)
{
  const auto f = unit_sphere_field();
  const TaskPose in(Vec3(0.1, 0, 0), 0), out(Vec3(0.8, 0, 0), 0);
  Rng rng(7);
  EXPECT_FALSE(segment_is_delta_safe(f, in, in, point_region, cfg_with(10), rng));
  EXPECT_TRUE(segment_is_delta_safe(f, out, out, point_region, cfg_with(10), rng));
}

TEST(SegmentCheck, FreeAndCrossingSegments)
{
  const auto f = unit_sphere_field();
  const SampleRegion region(RobotShape(), 0.0005);
  Rng rng(8);
  EXPECT_TRUE(segment_is_delta_safe(f, TaskPose(Vec3(-1, 0.5, 0), 0), TaskPose(Vec3(1, 0.5, 0), 1.0), region,
                                    cfg_with(100), rng));
  EXPECT_FALSE(segment_is_delta_safe(f, TaskPose(Vec3(-1, 0, 0), 0), TaskPose(Vec3(1, 0, 0), 0), region,
                                     cfg_with(100), rng));
  // A segment whose endpoints are both safe but whose middle grazes the
  // threshold surface is rejected by the interior poses.
  EXPECT_FALSE(segment_is_delta_safe(f, TaskPose(Vec3(-1, 0.25, 0), 0), TaskPose(Vec3(1, 0.25, 0), 0), point_region,
                                     cfg_with(5), rng));
}

TEST(SegmentCheck, CheckedPosesAreEvenlySpacedAndIncludeEndpoints)
{
  const TaskPose a(Vec3(0, 0, 0), 3.0), b(Vec3(0.5, 0.2, 0.1), -3.0);
  const double radius = 0.15, delta_p = 0.02;
  std::vector<TaskPose> seen;
  all_segment_poses(a, b, radius, delta_p, [&](const TaskPose& p) {
    seen.push_back(p);
    return true;
  });
  const double travel = (b.position() - a.position()).norm() + radius * std::abs(angle_diff(b.yaw(), a.yaw()));
  ASSERT_EQ(seen.size(), static_cast<std::size_t>(std::ceil(travel / delta_p)) + 1);
  EXPECT_EQ(seen.front(), a);
  EXPECT_EQ(seen.back(), b);
  for (std::size_t i = 1; i < seen.size(); ++i) {
    const double step = (seen[i].position() - seen[i - 1].position()).norm() +
                        radius * std::abs(angle_diff(seen[i].yaw(), seen[i - 1].yaw()));
    EXPECT_LE(step, delta_p + 1e-12);
    // Yaw crosses the ±pi seam along the short arc.
    EXPECT_LT(std::abs(angle_diff(seen[i].yaw(), seen[i - 1].yaw())), 0.1);
  }
}

TEST(SegmentCheck, StopsAtFirstFailure)
{
  int calls = 0;
  EXPECT_FALSE(all_segment_poses(TaskPose(), TaskPose(Vec3(1, 0, 0), 0), 0.0, 0.1, [&](const TaskPose&) {
    ++calls;
    return calls < 3;
  }));
  EXPECT_EQ(calls, 3);
}

TEST(SharedScenarios, ReuseOneSampleSet)
{
  const auto f = unit_sphere_field();
  SafetyConfig c = cfg_with(50);
  c.shared_scenarios = true;
  const ScenarioChecker a(f, SampleRegion(RobotShape(), 0.005), c, Rng(11));
  const ScenarioChecker b(f, SampleRegion(RobotShape(), 0.005), c, Rng(11));
  Rng r1(1), r2(999);
  for (double x = 0.25; x < 0.5; x += 0.003) {
    const TaskPose p(Vec3(x, 0.05, 0), 0.4);
    EXPECT_EQ(a.pose_safe(p, r1), b.pose_safe(p, r2));
  }
}

TEST(ContinuousCover, GrowsRegionByHalfSpacing)
{
  SafetyConfig c;
  c.delta_p = 0.04;
  EXPECT_EQ(planning_region(RobotShape(), 0.0005, c).inflation, 0.0005);
  c.continuous_cover = true;
  EXPECT_DOUBLE_EQ(planning_region(RobotShape(), 0.0005, c).inflation, 0.0205);
}

TEST(SafetyConfig, Validation)
{
  EXPECT_THROW(cfg_with(100, 0.0).validate(), std::invalid_argument);
  EXPECT_THROW(cfg_with(100, 1.0).validate(), std::invalid_argument);
  EXPECT_THROW(cfg_with(0).validate(), std::invalid_argument);
  SafetyConfig c;
  c.delta_p = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

std::vector<Obstacle> gaussian_sphere(double r, double sigma)
{
  return {Obstacle::sphere(Vec3::Zero(), r).with_sigma(sigma)};
}

bool bv(const std::vector<Obstacle>& obs, double x, const SampleRegion& reg = point_region)
{
  const TaskPose p(Vec3(x, 0, 0), 0);
  return baseline_bounding_volume(obs, p, p, reg, SafetyConfig{});
}
bool cc(const std::vector<Obstacle>& obs, double x, double delta = 0.05, const SampleRegion& reg = point_region)
{
  const TaskPose p(Vec3(x, 0, 0), 0);
  return baseline_chance_constraint(obs, p, p, reg, cfg_with(1, delta));
}
bool mp(const std::vector<Obstacle>& obs, double x, double delta = 0.05, const SampleRegion& reg = point_region)
{
  const TaskPose p(Vec3(x, 0, 0), 0);
  return baseline_max_prob(obs, p, p, reg, cfg_with(1, delta));
}

TEST(BoundingVolume, TwoSigmaInflation)
{
  const auto obs = gaussian_sphere(0.2, 0.1);
  EXPECT_TRUE(bv(obs, 0.41));
  EXPECT_FALSE(bv(obs, 0.39));
  EXPECT_TRUE(bv({}, 0.0));
}

TEST(BoundingVolume, ZeroSigmaIsDeterministicCheck)
{
  const auto obs = gaussian_sphere(0.2, 0.0);
  EXPECT_TRUE(bv(obs, 0.2001));
  EXPECT_FALSE(bv(obs, 0.1999));
  EXPECT_TRUE(cc(obs, 0.2001));
  EXPECT_FALSE(cc(obs, 0.1999));
  EXPECT_TRUE(mp(obs, 0.2001));
  EXPECT_FALSE(mp(obs, 0.1999));
}

TEST(ChanceConstraint, GaussianQuantileClearance)
{
  EXPECT_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-12);
  EXPECT_DOUBLE_EQ(normal_quantile(0.5), 0.0);
  const auto obs = gaussian_sphere(0.2, 0.1);
  EXPECT_TRUE(cc(obs, 0.2 + 0.16449));
  EXPECT_FALSE(cc(obs, 0.2 + 0.16448));
  // Median quantile: nominal geometry.
  EXPECT_TRUE(cc(obs, 0.2001, 0.5));
  EXPECT_FALSE(cc(obs, 0.1999, 0.5));
}

TEST(MaxProbability, BoundExamples)
{
  const auto obs = gaussian_sphere(0.1, 0.1);
  EXPECT_TRUE(mp(obs, 100.0));
  EXPECT_FALSE(mp(obs, 0.0));
  EXPECT_NEAR(max_probability_bound(obs[0], Vec3(1e3, 0, 0), 0.0), 0.0, 1e-300);
}

TEST(MaxProbability, ThresholdMatchesRootSolve)
{
  // Root of V (2 pi sigma^2)^{-3/2} exp(-g^2 / 2 sigma^2) = delta for a
  // sphere r = 0.1, sigma = 0.1, delta = 0.05, solved offline.
  const double threshold = 0.28282935389266983;
  const auto obs = gaussian_sphere(0.1, 0.1);
  EXPECT_TRUE(mp(obs, threshold + 1e-6));
  EXPECT_FALSE(mp(obs, threshold - 1e-6));

  // Independent brute-force scan of the same bound.
  const double V = 4.0 / 3.0 * std::numbers::pi * 1e-3;
  const double peak = V * std::pow(2.0 * std::numbers::pi * 0.01, -1.5);
  double flip = -1;
  for (double x = 0.1; x < 1.0; x += 1e-6)
    if (peak * std::exp(-(x - 0.1) * (x - 0.1) / 0.02) <= 0.05) {
      flip = x;
      break;
    }
  EXPECT_NEAR(flip, threshold, 2e-6);
}

TEST(MaxProbability, SteinerVolumeForCuboid)
{
  const Obstacle o = Obstacle::cuboid(Vec3::Zero(), Vec3(0.1, 0.2, 0.3)).with_sigma(0.05);
  const double R = 0.04;
  const double a = 0.1, b = 0.2, c = 0.3;
  const double V = 8 * a * b * c + 8 * R * (a * b + b * c + c * a) + 2 * std::numbers::pi * R * R * (a + b + c) +
                   4.0 / 3.0 * std::numbers::pi * R * R * R;
  const Vec3 x(0.3, 0, 0);
  const double gap = 0.2 - R;
  const double expected = V * std::pow(2 * std::numbers::pi * 0.0025, -1.5) * std::exp(-gap * gap / (2 * 0.0025));
  EXPECT_NEAR(max_probability_bound(o, x, R), expected, 1e-12 * expected);
}

TEST(Baselines, OrderingAtEquivalentParameters)
{
  // At delta = 0.05 the quantile clearance 1.645 sigma is smaller than the
  // 2 sigma inflation, so chance-constraint accepts everything bounding volume accepts.
  const auto obs = gaussian_sphere(0.15, 0.08);
  for (double x = 0.15; x < 0.6; x += 1e-3)
    if (bv(obs, x)) {
      EXPECT_TRUE(cc(obs, x));
    }
}

TEST(Baselines, InvariantUnderJointRescaling)
{
  Rng rng(12);
  for (int k = 0; k < 300; ++k) {
    const double sigma = rng.uniform(0.0, 0.1);
    const Vec3 c(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.2, 0.2));
    const Vec3 h(rng.uniform(0.02, 0.2), rng.uniform(0.02, 0.2), rng.uniform(0.02, 0.2));
    const double yaw = rng.uniform(-3, 3);
    const std::vector<Obstacle> obs{Obstacle::cuboid(c, h, yaw).with_sigma(sigma),
                                    Obstacle::sphere(-c, h.x()).with_sigma(sigma)};
    std::vector<Obstacle> big{Obstacle::cuboid(10 * c, 10 * h, yaw).with_sigma(10 * sigma),
                              Obstacle::sphere(-10 * c, 10 * h.x()).with_sigma(10 * sigma)};
    const RobotShape s = RobotShape::ellipsoid(rng.uniform(0.01, 0.1), 0.03, 0.01);
    const SampleRegion reg(s, 0.002), reg10(RobotShape(10 * s.semi_axes()), 0.02);
    const TaskPose p1(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), 0), 0.3), p2(Vec3(rng.uniform(-1, 1), 0, 0), -1);
    const TaskPose q1(10 * p1.position(), p1.yaw()), q2(10 * p2.position(), p2.yaw());
    SafetyConfig cfg, cfg10;
    cfg10.delta_p = 10 * cfg.delta_p;
    EXPECT_EQ(baseline_bounding_volume(obs, p1, p2, reg, cfg), baseline_bounding_volume(big, q1, q2, reg10, cfg10));
    EXPECT_EQ(baseline_chance_constraint(obs, p1, p2, reg, cfg), baseline_chance_constraint(big, q1, q2, reg10, cfg10));
    EXPECT_EQ(baseline_max_prob(obs, p1, p2, reg, cfg), baseline_max_prob(big, q1, q2, reg10, cfg10));
  }
}

TEST(Baselines, RequireSigma)
{
  EXPECT_THROW(BaselineChecker(CheckerKind::bounding_volume, {Obstacle::sphere(Vec3::Zero(), 0.1)}, point_region,
                               SafetyConfig{}),
               std::invalid_argument);
  EXPECT_THROW(BaselineChecker(CheckerKind::scenario, {}, point_region, SafetyConfig{}), std::invalid_argument);
}

TEST(CheckerKind, StringRoundTrip)
{
  for (auto k : {CheckerKind::scenario, CheckerKind::bounding_volume, CheckerKind::chance_constraint,
                 CheckerKind::max_prob})
    EXPECT_EQ(checker_kind_from_string(to_string(k)), k);
  EXPECT_THROW(checker_kind_from_string("bogus"), std::invalid_argument);
}

}  // namespace
}  // namespace scc
