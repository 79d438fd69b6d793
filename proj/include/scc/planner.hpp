#ifndef SCC_PLANNER_HPP
#define SCC_PLANNER_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "scc/collision.hpp"
#include "scc/geometry.hpp"
#include "scc/random.hpp"
#include "scc/tracking.hpp"

namespace scc {

struct PlannerConfig {
  SafetyConfig safety;
  std::size_t n_iter = 2000;
  double v_min = 0.01;  ///< [m/s], speed the path is certified for
  double v_max = 0.2;   ///< [m/s]
  TrackingErrorModel gamma_tilde = TrackingErrorModel::affine(0.2, 0.01);
  double r = 0.1;                    ///< orientation cost weight
  double steer_step = 0.0;           ///< weighted-metric step; 0 = workspace diagonal / 10
  double goal_bias = 0.05;
  double rewire_radius_factor = 0.0; ///< 0 = derived from the free-space measure
  std::uint64_t seed = 0;

  void validate() const
  {
    safety.validate();
    if (!(v_min > 0.0 && v_min <= v_max)) throw std::invalid_argument("PlannerConfig: need 0 < v_min <= v_max");
    if (n_iter < 1) throw std::invalid_argument("PlannerConfig: n_iter must be >= 1");
    if (!(r >= 0.0)) throw std::invalid_argument("PlannerConfig: r must be >= 0");
    if (!(steer_step >= 0.0)) throw std::invalid_argument("PlannerConfig: steer_step must be >= 0");
    if (!(goal_bias >= 0.0 && goal_bias < 1.0)) throw std::invalid_argument("PlannerConfig: goal_bias must lie in [0,1)");
    if (!(rewire_radius_factor >= 0.0)) throw std::invalid_argument("PlannerConfig: rewire_radius_factor must be >= 0");
  }

  /// Sample-region inflation used while planning: gamma(v_min).
  double tracking_inflation() const { return gamma_tilde(v_min); }
};

/// c_l(p, p') = |x - x'|^2 + r (phi - phi')^2 with the shortest-arc yaw
/// difference.
inline double line_cost(const TaskPose& p, const TaskPose& q, double r)
{
  const double dphi = angle_diff(q.yaw(), p.yaw());
  return (p.position() - q.position()).squaredNorm() + r * dphi * dphi;
}

/// Metric used for nearest-neighbour queries and steering; the square root of
/// the line cost.
inline double weighted_distance(const TaskPose& p, const TaskPose& q, double r) { return std::sqrt(line_cost(p, q, r)); }

enum class PlanStatus { success, unsafe_start, unsafe_goal, no_path };

inline const char* to_string(PlanStatus s)
{
  switch (s) {
    case PlanStatus::success: return "success";
    case PlanStatus::unsafe_start: return "unsafe_start";
    case PlanStatus::unsafe_goal: return "unsafe_goal";
    case PlanStatus::no_path: return "no_path";
  }
  return "unknown";
}

/// Safety evidence attached to each returned segment.
struct SegmentCertificate {
  CheckerKind checker = CheckerKind::scenario;
  std::size_t n_x = 0;
  double delta = 0.0;
  double inflation = 0.0;
};

/// Wall-clock accounting; not part of the reproducible result.
struct PlanStats {
  double plan_seconds = 0.0;
  double check_seconds = 0.0;
  std::size_t segment_checks = 0;
};

struct PathResult {
  PlanStatus status = PlanStatus::no_path;
  std::vector<TaskPose> poses;
  double cost = std::numeric_limits<double>::infinity();
  std::vector<SegmentCertificate> certificates;
  std::size_t iterations = 0;
  std::size_t tree_size = 0;
  std::vector<double> best_cost_history;  ///< best goal cost after each iteration
  PlanStats stats;

  bool ok() const { return status == PlanStatus::success; }

  /// Canonical text form of everything except timing.
  std::string serialize() const
  {
    std::ostringstream os;
    os.precision(17);
    os << "status " << to_string(status) << "\ncost " << cost << "\niterations " << iterations << "\ntree_size "
       << tree_size << "\nposes " << poses.size() << '\n';
    for (const auto& p : poses)
      os << p.position().x() << ' ' << p.position().y() << ' ' << p.position().z() << ' ' << p.yaw() << '\n';
    os << "certificates " << certificates.size() << '\n';
    for (const auto& c : certificates)
      os << to_string(c.checker) << ' ' << c.n_x << ' ' << c.delta << ' ' << c.inflation << '\n';
    os << "history";
    for (double h : best_cost_history) os << ' ' << h;
    os << '\n';
    return os.str();
  }
};

/// RRT* tree with subtree cost propagation on rewiring. Nearest and radius
/// queries go through a kd-tree over (x, y, z, yaw) and are exact.
class SearchTree {
public:
  struct Node {
    TaskPose pose;
    int parent = -1;
    double cost = 0.0;
    std::vector<int> children;
  };

  explicit SearchTree(double r) : r_(r)
  {
    if (!(r >= 0.0)) throw std::invalid_argument("SearchTree: r must be >= 0");
  }

  int add_root(const TaskPose& p)
  {
    nodes_.clear();
    kd_.clear();
    nodes_.push_back({p, -1, 0.0, {}});
    kd_.push_back({key(p)});
    return 0;
  }

  int add(const TaskPose& p, int parent)
  {
    const double c = nodes_[parent].cost + line_cost(nodes_[parent].pose, p, r_);
    nodes_.push_back({p, parent, c, {}});
    const int id = static_cast<int>(nodes_.size()) - 1;
    nodes_[parent].children.push_back(id);
    kd_insert(id);
    return id;
  }

  /// Moves `node` under `new_parent` and updates the costs of its subtree.
  void reparent(int node, int new_parent)
  {
    auto& old_children = nodes_[nodes_[node].parent].children;
    old_children.erase(std::find(old_children.begin(), old_children.end(), node));
    nodes_[node].parent = new_parent;
    nodes_[new_parent].children.push_back(node);
    nodes_[node].cost = nodes_[new_parent].cost + line_cost(nodes_[new_parent].pose, nodes_[node].pose, r_);
    std::vector<int> stack(nodes_[node].children.begin(), nodes_[node].children.end());
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      nodes_[n].cost = nodes_[nodes_[n].parent].cost + line_cost(nodes_[nodes_[n].parent].pose, nodes_[n].pose, r_);
      stack.insert(stack.end(), nodes_[n].children.begin(), nodes_[n].children.end());
    }
  }

  /// Closest node in the weighted metric; ties go to the lowest index.
  int nearest(const TaskPose& p) const
  {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    search(p, [&](int i) {
      if ((nodes_[i].pose.position() - p.position()).squaredNorm() > best_d) return;
      const double d = line_cost(nodes_[i].pose, p, r_);
      if (d < best_d || (d == best_d && i < best)) {
        best_d = d;
        best = i;
      }
    }, [&] { return best_d; });
    return best;
  }

  /// Nodes within `radius` in the weighted metric, in ascending index order.
  std::vector<int> near(const TaskPose& p, double radius) const
  {
    std::vector<int> out;
    const double r2 = radius * radius;
    search(p, [&](int i) {
      if ((nodes_[i].pose.position() - p.position()).squaredNorm() > r2) return;
      if (line_cost(nodes_[i].pose, p, r_) <= r2) out.push_back(i);
    }, [&] { return r2; });
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<TaskPose> path_to(int node) const
  {
    std::vector<TaskPose> out;
    for (int n = node; n >= 0; n = nodes_[n].parent) out.push_back(nodes_[n].pose);
    std::reverse(out.begin(), out.end());
    return out;
  }

  /// Largest deviation between stored cost-to-come and the cost recomputed
  /// from the root along parent links.
  double max_cost_inconsistency() const
  {
    double worst = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      double c = 0.0;
      std::size_t guard = 0;
      for (int n = static_cast<int>(i); nodes_[n].parent >= 0; n = nodes_[n].parent) {
        c += line_cost(nodes_[nodes_[n].parent].pose, nodes_[n].pose, r_);
        if (++guard > nodes_.size()) return std::numeric_limits<double>::infinity();  // cycle
      }
      worst = std::max(worst, std::abs(c - nodes_[i].cost));
    }
    return worst;
  }

  const Node& operator[](int i) const { return nodes_[i]; }
  std::size_t size() const { return nodes_.size(); }
  double weight() const { return r_; }

private:
  // kd-tree over (x, y, z, yaw) holding one node per tree node; the split
  // axis cycles with depth and insertion order is the sampling order.
  struct KdNode {
    std::array<double, 4> x{};
    int left = -1, right = -1;
    int axis = 0;
  };

  static std::array<double, 4> key(const TaskPose& p)
  {
    return {p.position().x(), p.position().y(), p.position().z(), p.yaw()};
  }

  void kd_insert(int id)
  {
    const auto x = key(nodes_[id].pose);
    int n = 0;
    for (;;) {
      const int axis = kd_[n].axis;
      int& child = x[axis] < kd_[n].x[axis] ? kd_[n].left : kd_[n].right;
      if (child < 0) {
        child = id;
        kd_.push_back({x, -1, -1, (axis + 1) % 4});
        return;
      }
      n = child;
    }
  }

  /// Lower bound on |coordinate difference| for every point across the split
  /// at `v` from `q`. Yaw may reach the far side through the +-pi seam.
  static double far_gap(double q, double v, int axis)
  {
    if (axis < 3) return std::abs(q - v);
    constexpr double pi = std::numbers::pi;
    return q < v ? std::min(v - q, q + pi) : std::min(q - v, pi - q);
  }

  /// Calls visit(i) for every node whose subtree cannot be excluded by
  /// limit(); subtrees farther than limit() in the weighted metric are skipped.
  template <class Visit, class Limit>
  void search(const TaskPose& p, Visit&& visit, Limit&& limit) const
  {
    if (nodes_.empty()) return;
    std::array<double, 4> off{};
    descend(0, 0.0, off, key(p), visit, limit);
  }

  // `rd` is the weighted squared distance from p to the region of `n`, built
  // from the per-axis gaps in `off`.
  template <class Visit, class Limit>
  void descend(int n, double rd, std::array<double, 4>& off, const std::array<double, 4>& p, Visit& visit,
               Limit& limit) const
  {
    if (rd > limit()) return;
    visit(n);
    const int axis = kd_[n].axis;
    const double q = p[axis];
    const double v = kd_[n].x[axis];
    const int near_child = q < v ? kd_[n].left : kd_[n].right;
    const int far_child = q < v ? kd_[n].right : kd_[n].left;
    if (near_child >= 0) descend(near_child, rd, off, p, visit, limit);
    if (far_child >= 0) {
      const double old = off[axis];
      const double gap = std::max(far_gap(q, v, axis), old);
      off[axis] = gap;
      descend(far_child, rd + (axis < 3 ? 1.0 : r_) * (gap * gap - old * old), off, p, visit, limit);
      off[axis] = old;
    }
  }

  double r_;
  std::vector<KdNode> kd_;
  std::vector<Node> nodes_;
};

/// SCC-RRT* (or RRT* with a parametric baseline check) in the 4D task space
/// (position, yaw). Driven one iteration at a time so callers can inspect the
/// tree; `plan()` runs it to completion.
class Planner {
public:
  Planner(const EdgeChecker& checker, const Bounds& workspace, const TaskPose& start, const TaskPose& goal,
          PlannerConfig cfg)
      : checker_(&checker), bounds_(workspace), start_(start), goal_(goal), cfg_(std::move(cfg)),
        tree_(cfg_.r),
        sample_rng_(derive_seed(cfg_.seed, 1)), check_rng_(derive_seed(cfg_.seed, 2))
  {
    cfg_.validate();
    if (!bounds_.valid()) throw std::invalid_argument("Planner: invalid workspace bounds");
    if (!bounds_.contains(start.position())) throw std::invalid_argument("Planner: start outside workspace");
    if (!bounds_.contains(goal.position())) throw std::invalid_argument("Planner: goal outside workspace");
    steer_ = cfg_.steer_step > 0.0 ? cfg_.steer_step : bounds_.diagonal() / 10.0;
    gamma_rrt_ = cfg_.rewire_radius_factor > 0.0 ? cfg_.rewire_radius_factor : default_rewire_factor();
  }

  /// Checks the endpoints and seeds the tree.
  PlanStatus initialize()
  {
    if (!timed_pose_check(start_)) return status_ = PlanStatus::unsafe_start;
    if (!timed_pose_check(goal_)) return status_ = PlanStatus::unsafe_goal;
    tree_.add_root(start_);
    initialized_ = true;
    return status_ = PlanStatus::no_path;
  }

  /// One RRT* iteration: sample, steer, choose parent, rewire, try goal.
  void step()
  {
    if (!initialized_) throw std::logic_error("Planner::step before initialize");
    ++iterations_;
    const TaskPose sample = sample_rng_.uniform() < cfg_.goal_bias ? goal_ : random_pose();
    const int nearest = tree_.nearest(sample);
    const TaskPose candidate = steer(tree_[nearest].pose, sample);
    if (!(candidate == tree_[nearest].pose) && !(goal_node_ >= 0 && candidate == goal_)) {
      const int id = insert(candidate, nearest);
      if (id >= 0 && goal_node_ < 0) {
        if (candidate == goal_) {
          goal_node_ = id;
        } else if (weighted_distance(candidate, goal_, cfg_.r) <= steer_) {
          goal_node_ = insert(goal_, id);
        }
      }
    }
    history_.push_back(best_cost());
  }

  double best_cost() const
  {
    return goal_node_ >= 0 ? tree_[goal_node_].cost : std::numeric_limits<double>::infinity();
  }

  PathResult result() const
  {
    PathResult out;
    out.status = status_;
    out.iterations = iterations_;
    out.tree_size = tree_.size();
    out.best_cost_history = history_;
    out.stats.check_seconds = check_seconds_;
    out.stats.segment_checks = segment_checks_;
    if (initialized_ && goal_node_ >= 0) {
      out.status = PlanStatus::success;
      out.poses = tree_.path_to(goal_node_);
      out.cost = tree_[goal_node_].cost;
      const SegmentCertificate cert{checker_->kind(),
                                    checker_->kind() == CheckerKind::scenario ? checker_->config().n_x : 0,
                                    checker_->config().delta, checker_->region().inflation};
      out.certificates.assign(out.poses.size() - 1, cert);
    }
    return out;
  }

  const SearchTree& tree() const { return tree_; }
  std::size_t iterations() const { return iterations_; }
  double steer_step() const { return steer_; }

  double rewire_radius() const
  {
    const double n = static_cast<double>(tree_.size());
    if (n < 2.0) return steer_;
    const double d = cfg_.r > 0.0 ? 4.0 : 3.0;
    return std::min(steer_, gamma_rrt_ * std::pow(std::log(n) / n, 1.0 / d));
  }

private:
  double default_rewire_factor() const
  {
    // gamma* = 2 (1 + 1/d)^(1/d) (mu / zeta_d)^(1/d); the yaw axis is scaled
    // by sqrt(r) in the metric.
    if (cfg_.r > 0.0) {
      const double mu = bounds_.volume() * 2.0 * std::numbers::pi * std::sqrt(cfg_.r);
      const double zeta = std::numbers::pi * std::numbers::pi / 2.0;
      return 2.0 * std::pow(1.25, 0.25) * std::pow(mu / zeta, 0.25);
    }
    const double zeta = 4.0 / 3.0 * std::numbers::pi;
    return 2.0 * std::pow(4.0 / 3.0, 1.0 / 3.0) * std::pow(bounds_.volume() / zeta, 1.0 / 3.0);
  }

  TaskPose random_pose()
  {
    Vec3 x;
    for (int a = 0; a < 3; ++a) x[a] = sample_rng_.uniform(bounds_.lo[a], bounds_.hi[a]);
    return {x, sample_rng_.uniform(-std::numbers::pi, std::numbers::pi)};
  }

  TaskPose steer(const TaskPose& from, const TaskPose& to) const
  {
    const double d = weighted_distance(from, to, cfg_.r);
    if (d <= steer_) return to;
    return interpolate(from, to, steer_ / d);
  }

  bool timed_pose_check(const TaskPose& p)
  {
    const auto t0 = std::chrono::steady_clock::now();
    const bool ok = checker_->pose_safe(p, check_rng_);
    check_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return ok;
  }

  bool timed_segment_check(const TaskPose& a, const TaskPose& b)
  {
    ++segment_checks_;
    const auto t0 = std::chrono::steady_clock::now();
    const bool ok = checker_->segment_safe(a, b, check_rng_);
    check_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return ok;
  }

  /// Choose-parent among the near set (cheapest first, first safe edge wins),
  /// then rewire neighbours through the new node. Returns -1 if no safe parent.
  int insert(const TaskPose& pose, int nearest)
  {
    std::vector<int> near = tree_.near(pose, std::max(rewire_radius(), 0.0));
    if (std::find(near.begin(), near.end(), nearest) == near.end()) near.push_back(nearest);

    struct Candidate {
      int node;
      double cost;
    };
    std::vector<Candidate> cands;
    cands.reserve(near.size());
    for (int n : near) cands.push_back({n, tree_[n].cost + line_cost(tree_[n].pose, pose, cfg_.r)});
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });

    int parent = -1;
    for (const auto& c : cands) {
      if (timed_segment_check(tree_[c.node].pose, pose)) {
        parent = c.node;
        break;
      }
    }
    if (parent < 0) return -1;
    const int id = tree_.add(pose, parent);

    for (int n : near) {
      if (n == parent || n == 0) continue;
      const double via = tree_[id].cost + line_cost(pose, tree_[n].pose, cfg_.r);
      if (via < tree_[n].cost && timed_segment_check(pose, tree_[n].pose)) tree_.reparent(n, id);
    }
    return id;
  }

  const EdgeChecker* checker_;
  Bounds bounds_;
  TaskPose start_, goal_;
  PlannerConfig cfg_;
  SearchTree tree_;
  Rng sample_rng_, check_rng_;
  double steer_ = 0.0;
  double gamma_rrt_ = 0.0;
  bool initialized_ = false;
  PlanStatus status_ = PlanStatus::no_path;
  int goal_node_ = -1;
  std::size_t iterations_ = 0;
  std::vector<double> history_;
  double check_seconds_ = 0.0;
  std::size_t segment_checks_ = 0;
};

/// Runs the planner for cfg.n_iter iterations. Unsafe endpoints are reported
/// through the status, as is failure to reach the goal.
inline PathResult plan(const EdgeChecker& checker, const Bounds& workspace, const TaskPose& start, const TaskPose& goal,
                       const PlannerConfig& cfg)
{
  const auto t0 = std::chrono::steady_clock::now();
  Planner planner(checker, workspace, start, goal, cfg);
  if (planner.initialize() == PlanStatus::no_path)
    for (std::size_t i = 0; i < cfg.n_iter; ++i) planner.step();
  PathResult out = planner.result();
  out.stats.plan_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

/// Arc-length-uniform resampling of a pose polyline to K poses. Positions are
/// parameterised by cumulative position length; yaw follows the shortest arc
/// within each segment. Endpoints are kept exactly.
inline std::vector<TaskPose> interpolate_path(const std::vector<TaskPose>& poses, std::size_t K)
{
  if (K < 2) throw std::invalid_argument("interpolate_path: K must be >= 2");
  if (poses.empty()) throw std::invalid_argument("interpolate_path: empty path");
  if (poses.size() == 1) return std::vector<TaskPose>(K, poses.front());

  std::vector<double> cum(poses.size(), 0.0);
  for (std::size_t i = 1; i < poses.size(); ++i)
    cum[i] = cum[i - 1] + (poses[i].position() - poses[i - 1].position()).norm();
  const double total = cum.back();
  if (total == 0.0) {
    // Pure rotation: parameterise by index.
    for (std::size_t i = 0; i < poses.size(); ++i) cum[i] = static_cast<double>(i);
  }
  const double length = cum.back();

  std::vector<TaskPose> out;
  out.reserve(K);
  out.push_back(poses.front());
  std::size_t seg = 0;
  for (std::size_t k = 1; k + 1 < K; ++k) {
    const double target = length * static_cast<double>(k) / static_cast<double>(K - 1);
    while (seg + 2 < poses.size() && cum[seg + 1] < target) ++seg;
    const double span = cum[seg + 1] - cum[seg];
    const double t = span > 0.0 ? (target - cum[seg]) / span : 0.0;
    out.push_back(interpolate(poses[seg], poses[seg + 1], t));
  }
  out.push_back(poses.back());
  return out;
}

inline std::vector<TaskPose> interpolate_path(const PathResult& result, std::size_t K)
{
  return interpolate_path(result.poses, K);
}

/// Total position length of a polyline.
inline double position_length(const std::vector<TaskPose>& poses)
{
  double L = 0.0;
  for (std::size_t i = 1; i < poses.size(); ++i) L += (poses[i].position() - poses[i - 1].position()).norm();
  return L;
}

}  // namespace scc

#endif  // SCC_PLANNER_HPP
