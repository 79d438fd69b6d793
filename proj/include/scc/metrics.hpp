#ifndef SCC_METRICS_HPP
#define SCC_METRICS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "scc/geometry.hpp"
#include "scc/occupancy.hpp"
#include "scc/planner.hpp"
#include "scc/random.hpp"
#include "scc/tracking.hpp"
#include "scc/velocity.hpp"

namespace scc {

/// Predicted p_free per cell with the binary ground truth (0 obstacle, 1 free).
struct LabeledRaster {
  std::vector<double> prediction;
  std::vector<std::uint8_t> truth;

  LabeledRaster() = default;
  LabeledRaster(std::vector<double> pred, std::vector<std::uint8_t> labels)
      : prediction(std::move(pred)), truth(std::move(labels))
  {
    if (prediction.size() != truth.size()) throw DimensionMismatch("LabeledRaster: prediction/truth size mismatch");
    if (prediction.empty()) throw std::invalid_argument("LabeledRaster: empty raster");
    for (double p : prediction)
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("LabeledRaster: prediction outside [0,1]");
    for (auto y : truth)
      if (y > 1) throw std::invalid_argument("LabeledRaster: labels must be binary");
  }

  static LabeledRaster from(const RasterField& pred, const RasterField& labels)
  {
    if (pred.dims() != labels.dims()) throw DimensionMismatch("LabeledRaster: raster dims differ");
    std::vector<double> p(pred.values().begin(), pred.values().end());
    std::vector<std::uint8_t> y(labels.cell_count());
    for (std::size_t c = 0; c < y.size(); ++c) {
      const float v = labels.values()[c];
      if (v != 0.0f && v != 1.0f) throw std::invalid_argument("LabeledRaster: truth raster is not binary");
      y[c] = v == 1.0f ? 1 : 0;
    }
    return {std::move(p), std::move(y)};
  }

  std::size_t size() const { return prediction.size(); }
};

/// Hard label: free iff p_free >= 0.5.
inline std::uint8_t hard_label(double p_free) { return p_free >= 0.5 ? 1 : 0; }

inline double pixel_accuracy(const LabeledRaster& lr)
{
  std::size_t correct = 0;
  for (std::size_t c = 0; c < lr.size(); ++c) correct += hard_label(lr.prediction[c]) == lr.truth[c];
  return static_cast<double>(correct) / static_cast<double>(lr.size());
}

struct MeanIoU {
  double value = 0.0;
  std::array<double, 2> per_class{};  ///< index 0 obstacle, 1 free
  std::array<bool, 2> absent{};       ///< class in neither prediction nor truth (IoU set to 1)
};

inline MeanIoU mean_iou(const LabeledRaster& lr)
{
  std::array<std::size_t, 2> inter{}, uni{};
  for (std::size_t c = 0; c < lr.size(); ++c) {
    const auto p = hard_label(lr.prediction[c]);
    const auto y = lr.truth[c];
    for (std::uint8_t k = 0; k < 2; ++k) {
      inter[k] += (p == k && y == k);
      uni[k] += (p == k || y == k);
    }
  }
  MeanIoU out;
  for (int k = 0; k < 2; ++k) {
    out.absent[k] = uni[k] == 0;
    out.per_class[k] = out.absent[k] ? 1.0 : static_cast<double>(inter[k]) / static_cast<double>(uni[k]);
  }
  out.value = 0.5 * (out.per_class[0] + out.per_class[1]);
  return out;
}

inline double brier_score(const LabeledRaster& lr)
{
  double s = 0.0;
  for (std::size_t c = 0; c < lr.size(); ++c) {
    const double e = lr.prediction[c] - lr.truth[c];
    s += e * e;
  }
  return s / static_cast<double>(lr.size());
}

inline constexpr double nll_epsilon = 1e-7;

inline double nll(const LabeledRaster& lr)
{
  double s = 0.0;
  for (std::size_t c = 0; c < lr.size(); ++c) {
    const double p = std::clamp(lr.prediction[c], nll_epsilon, 1.0 - nll_epsilon);
    s -= lr.truth[c] ? std::log(p) : std::log(1.0 - p);
  }
  return s / static_cast<double>(lr.size());
}

/// Ten equal-width confidence bins over [0.5, 1); confidence = max(p, 1 - p).
/// A confidence of exactly 1 falls in the top bin.
struct ReliabilityDiagram {
  static constexpr std::size_t bins = 10;
  struct Bin {
    double lo = 0.0, hi = 0.0;
    std::size_t count = 0;
    double mean_confidence = std::numeric_limits<double>::quiet_NaN();
    double accuracy = std::numeric_limits<double>::quiet_NaN();  ///< NaN marks an empty bin
  };
  std::array<Bin, bins> bin;
};

inline std::size_t confidence_bin(double confidence)
{
  const double k = std::floor((confidence - 0.5) * 20.0);
  return static_cast<std::size_t>(std::clamp(k, 0.0, 9.0));
}

inline ReliabilityDiagram reliability(const LabeledRaster& lr)
{
  ReliabilityDiagram d;
  std::array<double, ReliabilityDiagram::bins> conf_sum{}, correct{};
  for (std::size_t c = 0; c < lr.size(); ++c) {
    const double p = lr.prediction[c];
    const double conf = std::max(p, 1.0 - p);
    const std::size_t b = confidence_bin(conf);
    ++d.bin[b].count;
    conf_sum[b] += conf;
    correct[b] += hard_label(p) == lr.truth[c];
  }
  for (std::size_t b = 0; b < ReliabilityDiagram::bins; ++b) {
    auto& bin = d.bin[b];
    bin.lo = 0.5 + 0.05 * static_cast<double>(b);
    bin.hi = bin.lo + 0.05;
    if (bin.count > 0) {
      bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
      bin.accuracy = correct[b] / static_cast<double>(bin.count);
    }
  }
  return d;
}

/// Sum of line costs along the polyline.
inline double path_cost(const std::vector<TaskPose>& path, double r)
{
  double c = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) c += line_cost(path[i - 1], path[i], r);
  return c;
}

/// Mean/std of run costs per (method, sweep value) cell, normalised by the
/// largest cell mean of the whole sweep.
struct CostCell {
  std::string method;
  double sweep = 0.0;
  std::size_t runs = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
  double normalized_mean = std::numeric_limits<double>::quiet_NaN();
  double normalized_stddev = std::numeric_limits<double>::quiet_NaN();
};

struct CostSample {
  std::string method;
  double sweep = 0.0;
  double cost = 0.0;  ///< NaN for failed runs, which are excluded
};

inline std::vector<CostCell> normalized_costs(const std::vector<CostSample>& samples)
{
  std::map<std::pair<std::string, double>, std::vector<double>> groups;
  for (const auto& s : samples) {
    auto& g = groups[{s.method, s.sweep}];
    if (std::isfinite(s.cost)) g.push_back(s.cost);
  }
  std::vector<CostCell> cells;
  double max_mean = 0.0;
  for (const auto& [key, costs] : groups) {
    CostCell cell{key.first, key.second, costs.size()};
    if (!costs.empty()) {
      double sum = 0.0;
      for (double c : costs) sum += c;
      cell.mean = sum / static_cast<double>(costs.size());
      double var = 0.0;
      for (double c : costs) var += (c - cell.mean) * (c - cell.mean);
      cell.stddev = costs.size() > 1 ? std::sqrt(var / static_cast<double>(costs.size() - 1)) : 0.0;
      max_mean = std::max(max_mean, cell.mean);
    }
    cells.push_back(cell);
  }
  if (max_mean > 0.0)
    for (auto& c : cells) {
      c.normalized_mean = c.mean / max_mean;
      c.normalized_stddev = c.stddev / max_mean;
    }
  return cells;
}

struct ViolationReport {
  std::size_t trials = 0;
  std::size_t checked = 0;     ///< (trial, knot, point) triples
  std::size_t violations = 0;
  double fraction() const { return checked ? static_cast<double>(violations) / static_cast<double>(checked) : 0.0; }
};

struct ValidationConfig {
  double delta = 0.05;
  std::size_t n_trials = 1000;
  std::size_t points_per_pose = 100;
};

/// Uniform point in the ball of radius r.
inline Vec3 sample_ball(double r, Rng& rng)
{
  if (r <= 0.0) return Vec3::Zero();
  while (true) {
    const Vec3 u(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    if (u.squaredNorm() <= 1.0) return r * u;
  }
}

/// Simulates executed motions by displacing every knot pose by a point drawn
/// uniformly from the ball of radius gamma(v_knot), then counts sampled robot
/// points with p_free < 1 - delta.
inline ViolationReport monte_carlo_validate(const OccupancyField& field, const Trajectory& traj, const RobotShape& shape,
                                            const TrackingErrorModel& gamma, const ValidationConfig& cfg, Rng& rng)
{
  ViolationReport rep;
  rep.trials = cfg.n_trials;
  const double threshold = 1.0 - cfg.delta;
  const SampleRegion body(shape, 0.0);
  std::vector<Vec3> pts;
  for (std::size_t trial = 0; trial < cfg.n_trials; ++trial) {
    for (std::size_t k = 0; k < traj.poses.size(); ++k) {
      const TaskPose& planned = traj.poses[k];
      const TaskPose executed(planned.position() + sample_ball(gamma(traj.v[k]), rng), planned.yaw());
      pts.clear();
      sample_region_uniform(body, cfg.points_per_pose, rng, pts);
      for (const Vec3& x0 : pts) {
        ++rep.checked;
        rep.violations += field.p_free(apply_rigid_motion(executed, x0)) < threshold;
      }
    }
  }
  return rep;
}

}  // namespace scc

#endif  // SCC_METRICS_HPP
