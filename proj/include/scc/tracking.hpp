#ifndef SCC_TRACKING_HPP
#define SCC_TRACKING_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace scc {

/// Non-decreasing piecewise-linear bound v -> gamma(v) on the workspace
/// deviation between executed and planned motion at reference speed v.
/// Beyond the last knot the last segment's slope is continued.
class TrackingErrorModel {
public:
  struct Knot {
    double speed;
    double bound;
  };

  /// gamma(v) = v / v_max * bound_at_v_max.
  static TrackingErrorModel affine(double v_max, double bound_at_v_max)
  {
    return TrackingErrorModel({{0.0, 0.0}, {v_max, bound_at_v_max}});
  }

  TrackingErrorModel() : TrackingErrorModel(affine(0.2, 0.01)) {}

  explicit TrackingErrorModel(std::vector<Knot> knots) : knots_(std::move(knots))
  {
    if (knots_.empty()) throw std::invalid_argument("TrackingErrorModel: no knots");
    if (knots_.front().speed != 0.0) throw std::invalid_argument("TrackingErrorModel: first knot must be at speed 0");
    if (!(knots_.front().bound >= 0.0)) throw std::invalid_argument("TrackingErrorModel: gamma(0) must be >= 0");
    for (std::size_t i = 1; i < knots_.size(); ++i) {
      if (!(knots_[i].speed > knots_[i - 1].speed)) throw std::invalid_argument("TrackingErrorModel: speeds must increase");
      if (!(knots_[i].bound >= knots_[i - 1].bound)) throw std::invalid_argument("TrackingErrorModel: bound must be non-decreasing");
    }
  }

  double operator()(double v) const
  {
    if (v <= 0.0 || knots_.size() == 1) return knots_.front().bound;
    auto it = std::upper_bound(knots_.begin(), knots_.end(), v, [](double s, const Knot& k) { return s < k.speed; });
    if (it == knots_.end()) it = std::prev(knots_.end());
    const Knot& b = *it;
    const Knot& a = *std::prev(it);
    return a.bound + (b.bound - a.bound) * (v - a.speed) / (b.speed - a.speed);
  }

  /// Largest v in [0, v_cap] with gamma(v) <= d (line search by bisection;
  /// the returned speed always satisfies the bound). Returns 0 when even
  /// gamma(0) exceeds d.
  double max_speed_within(double d, double v_cap, double tol = 1e-9) const
  {
    const auto& g = *this;
    if (g(v_cap) <= d) return v_cap;
    if (g(0.0) > d) return 0.0;
    double lo = 0.0, hi = v_cap;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) <= d ? lo : hi) = mid;
    }
    return lo;
  }

  TrackingErrorModel scaled(double factor) const
  {
    if (!(factor >= 0.0)) throw std::invalid_argument("TrackingErrorModel: scale must be >= 0");
    std::vector<Knot> k = knots_;
    for (auto& kn : k) kn.bound *= factor;
    return TrackingErrorModel(std::move(k));
  }

  const std::vector<Knot>& knots() const { return knots_; }

private:
  std::vector<Knot> knots_;
};

}  // namespace scc

#endif  // SCC_TRACKING_HPP
