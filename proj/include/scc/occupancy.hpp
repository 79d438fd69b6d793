#ifndef SCC_OCCUPANCY_HPP
#define SCC_OCCUPANCY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scc/geometry.hpp"

namespace scc {

/// Result of a field query. `outside` flags points outside the field's domain,
/// where the backend's default was returned instead of data.
struct Occupancy {
  double p_free = 1.0;
  bool outside = false;
};

/// Queryable map x -> P(x in W_free) over an axis-aligned workspace box.
/// Implementations are immutable after construction.
class OccupancyField {
public:
  virtual ~OccupancyField() = default;
  virtual Occupancy query(const Vec3& x) const = 0;
  virtual Bounds bounds() const = 0;

  double p_free(const Vec3& x) const { return query(x).p_free; }
};

/// Occupancy probability of a single obstacle under the linear-decay model:
/// 1 inside, 1 - d/d_stop at surface distance d, zero beyond d_stop.
inline double linear_decay_occupancy(double surface_distance, double d_stop)
{
  if (surface_distance <= 0.0) return 1.0;
  if (surface_distance >= d_stop) return 0.0;
  return 1.0 - surface_distance / d_stop;
}

/// Synthetic scene with linearly decaying occupancy around each obstacle.
/// Overlapping obstacles combine as independent events:
///   p_free(x) = prod_i (1 - p_occ,i(x)).
/// Points outside the workspace are free and flagged.
class AnalyticField final : public OccupancyField {
public:
  AnalyticField(std::vector<Obstacle> obstacles, const Bounds& bounds)
      : obstacles_(std::move(obstacles)), bounds_(bounds)
  {
    if (!bounds_.valid()) throw std::invalid_argument("AnalyticField: invalid bounds");
    for (const auto& o : obstacles_)
      if (!o.d_stop) throw std::invalid_argument("AnalyticField: obstacle without d_stop");
  }

  Occupancy query(const Vec3& x) const override
  {
    if (!bounds_.contains(x)) return {1.0, true};
    return {free_probability(x), false};
  }
  Bounds bounds() const override { return bounds_; }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }

  /// p_free ignoring the workspace bounds.
  double free_probability(const Vec3& x) const
  {
    double p = 1.0;
    for (const auto& o : obstacles_) {
      p *= 1.0 - linear_decay_occupancy(distance_point_to_obstacle(x, o), *o.d_stop);
      if (p == 0.0) break;
    }
    return p;
  }

private:
  std::vector<Obstacle> obstacles_;
  Bounds bounds_;
};

enum class Interpolation { nearest, trilinear };

/// Dense per-cell p_free grid. Cell (i, j, k) covers
/// [origin + (i, j, k) * cell, origin + (i+1, j+1, k+1) * cell); its value is
/// attached to the cell centre. Storage is x-fastest.
class RasterField final : public OccupancyField {
public:
  using Dims = std::array<std::size_t, 3>;

  RasterField() = default;
  RasterField(const Vec3& origin, double cell_size, const Dims& dims, std::vector<float> values,
              Interpolation mode = Interpolation::trilinear, double outside_value = 0.0)
      : origin_(origin), cell_(cell_size), dims_(dims), values_(std::move(values)), mode_(mode),
        outside_value_(outside_value)
  {
    if (!(cell_ > 0.0) || !std::isfinite(cell_)) throw std::invalid_argument("RasterField: cell size must be positive");
    if (dims_[0] == 0 || dims_[1] == 0 || dims_[2] == 0) throw std::invalid_argument("RasterField: dims must be positive");
    if (values_.size() != cell_count()) throw std::invalid_argument("RasterField: value count does not match dims");
    for (float v : values_)
      if (!(v >= 0.0f && v <= 1.0f)) throw std::invalid_argument("RasterField: values must lie in [0,1]");
    if (!(outside_value_ >= 0.0 && outside_value_ <= 1.0)) throw std::invalid_argument("RasterField: outside value must lie in [0,1]");
  }

  /// Constant raster.
  static RasterField filled(const Vec3& origin, double cell_size, const Dims& dims, float value)
  {
    return RasterField(origin, cell_size, dims, std::vector<float>(dims[0] * dims[1] * dims[2], value));
  }

  Occupancy query(const Vec3& x) const override { return query(x, mode_); }

  Occupancy query(const Vec3& x, Interpolation mode) const
  {
    const Vec3 g = (x - origin_) / cell_;
    for (int a = 0; a < 3; ++a)
      if (!(g[a] >= 0.0 && g[a] <= static_cast<double>(dims_[a]))) return {outside_value_, true};
    return {mode == Interpolation::nearest ? nearest(g) : trilinear(g), false};
  }

  Bounds bounds() const override
  {
    Vec3 hi;
    for (int a = 0; a < 3; ++a) hi[a] = origin_[a] + cell_ * static_cast<double>(dims_[a]);
    return {origin_, hi};
  }

  const Vec3& origin() const { return origin_; }
  double cell_size() const { return cell_; }
  const Dims& dims() const { return dims_; }
  const std::vector<float>& values() const { return values_; }
  Interpolation mode() const { return mode_; }
  double outside_value() const { return outside_value_; }
  std::size_t cell_count() const { return dims_[0] * dims_[1] * dims_[2]; }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + dims_[0] * (j + dims_[1] * k); }
  float at(std::size_t i, std::size_t j, std::size_t k) const { return values_[index(i, j, k)]; }
  Vec3 cell_center(std::size_t i, std::size_t j, std::size_t k) const
  {
    return origin_ + cell_ * Vec3(static_cast<double>(i) + 0.5, static_cast<double>(j) + 0.5, static_cast<double>(k) + 0.5);
  }

  RasterField with_mode(Interpolation mode) const
  {
    RasterField r = *this;
    r.mode_ = mode;
    return r;
  }
  RasterField with_outside_value(double v) const
  {
    return RasterField(origin_, cell_, dims_, values_, mode_, v);
  }

private:
  static std::size_t clamp_index(double v, std::size_t n)
  {
    if (v <= 0.0) return 0;
    const auto i = static_cast<std::size_t>(v);
    return std::min(i, n - 1);
  }

  double nearest(const Vec3& g) const
  {
    return at(clamp_index(g.x(), dims_[0]), clamp_index(g.y(), dims_[1]), clamp_index(g.z(), dims_[2]));
  }

  double trilinear(const Vec3& g) const
  {
    // Interpolate between cell centres; clamp to the border cells in the
    // half-cell margin of the extent.
    std::array<std::size_t, 3> i0{}, i1{};
    std::array<double, 3> w{};
    for (int a = 0; a < 3; ++a) {
      const double c = g[a] - 0.5;
      const double n = static_cast<double>(dims_[a]);
      if (c <= 0.0) {
        i0[a] = i1[a] = 0;
        w[a] = 0.0;
      } else if (c >= n - 1.0) {
        i0[a] = i1[a] = dims_[a] - 1;
        w[a] = 0.0;
      } else {
        const double f = std::floor(c);
        i0[a] = static_cast<std::size_t>(f);
        i1[a] = i0[a] + 1;
        w[a] = c - f;
      }
    }
    double v = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
      const bool bx = corner & 1, by = corner & 2, bz = corner & 4;
      const double wt = (bx ? w[0] : 1.0 - w[0]) * (by ? w[1] : 1.0 - w[1]) * (bz ? w[2] : 1.0 - w[2]);
      if (wt == 0.0) continue;
      v += wt * at(bx ? i1[0] : i0[0], by ? i1[1] : i0[1], bz ? i1[2] : i0[2]);
    }
    return std::clamp(v, 0.0, 1.0);
  }

  Vec3 origin_ = Vec3::Zero();
  double cell_ = 1.0;
  Dims dims_{1, 1, 1};
  std::vector<float> values_{1.0f};
  Interpolation mode_ = Interpolation::trilinear;
  double outside_value_ = 0.0;
};

inline Occupancy raster_query(const RasterField& field, const Vec3& x, Interpolation mode)
{
  return field.query(x, mode);
}

/// Per-cell predictions of M ensemble members over a common grid.
struct PredictionStack {
  std::vector<RasterField> members;
};

class DimensionMismatch : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Uniformly weighted mixture of the members: per-cell arithmetic mean.
inline RasterField ensemble_fuse(const PredictionStack& stack)
{
  if (stack.members.empty()) throw std::invalid_argument("ensemble_fuse: empty stack");
  const RasterField& first = stack.members.front();
  for (const auto& m : stack.members)
    if (m.dims() != first.dims()) throw DimensionMismatch("ensemble_fuse: member dims differ");

  std::vector<double> sum(first.cell_count(), 0.0);
  for (const auto& m : stack.members)
    for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += m.values()[c];

  const double inv_m = 1.0 / static_cast<double>(stack.members.size());
  std::vector<float> mean(sum.size());
  for (std::size_t c = 0; c < sum.size(); ++c)
    mean[c] = static_cast<float>(std::clamp(sum[c] * inv_m, 0.0, 1.0));
  return RasterField(first.origin(), first.cell_size(), first.dims(), std::move(mean), first.mode(),
                     first.outside_value());
}

/// Samples an analytic scene at the cell centres of the given grid. Each
/// obstacle only touches cells within its influence box.
inline RasterField rasterize(const AnalyticField& field, const Vec3& origin, double cell_size,
                             const RasterField::Dims& dims)
{
  RasterField grid = RasterField::filled(origin, cell_size, dims, 1.0f);
  std::vector<double> p(grid.cell_count(), 1.0);
  for (const auto& o : field.obstacles()) {
    const double reach = o.enclosing_radius() + *o.d_stop + cell_size;
    std::array<std::size_t, 3> lo{}, hi{};
    for (int a = 0; a < 3; ++a) {
      const double l = (o.center()[a] - reach - origin[a]) / cell_size - 0.5;
      const double h = (o.center()[a] + reach - origin[a]) / cell_size - 0.5;
      const double n = static_cast<double>(dims[a]);
      lo[a] = static_cast<std::size_t>(std::clamp(std::floor(l), 0.0, n));
      hi[a] = static_cast<std::size_t>(std::clamp(std::ceil(h) + 1.0, 0.0, n));
    }
    for (std::size_t k = lo[2]; k < hi[2]; ++k)
      for (std::size_t j = lo[1]; j < hi[1]; ++j)
        for (std::size_t i = lo[0]; i < hi[0]; ++i) {
          const double occ = linear_decay_occupancy(distance_point_to_obstacle(grid.cell_center(i, j, k), o), *o.d_stop);
          p[grid.index(i, j, k)] *= 1.0 - occ;
        }
  }
  std::vector<float> values(p.size());
  for (std::size_t c = 0; c < p.size(); ++c) values[c] = static_cast<float>(p[c]);
  return RasterField(origin, cell_size, dims, std::move(values));
}

/// Grid covering `bounds` with the given cell size (dims rounded up).
inline RasterField rasterize(const AnalyticField& field, double cell_size)
{
  const Bounds b = field.bounds();
  RasterField::Dims dims{};
  for (int a = 0; a < 3; ++a)
    dims[a] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(b.extent()[a] / cell_size - 1e-9)));
  return rasterize(field, b.lo, cell_size, dims);
}

/// Lifts a single-layer (nz == 1) raster to `layers` identical layers of the
/// given cell size starting at height z0. Models obstacles of fixed height.
inline RasterField extrude(const RasterField& plane, double z0, std::size_t layers)
{
  if (plane.dims()[2] != 1) throw std::invalid_argument("extrude: input must have a single layer");
  if (layers == 0) throw std::invalid_argument("extrude: layers must be >= 1");
  const auto& d = plane.dims();
  std::vector<float> values;
  values.reserve(d[0] * d[1] * layers);
  for (std::size_t k = 0; k < layers; ++k) values.insert(values.end(), plane.values().begin(), plane.values().end());
  Vec3 origin = plane.origin();
  origin.z() = z0;
  return RasterField(origin, plane.cell_size(), {d[0], d[1], layers}, std::move(values), plane.mode(),
                     plane.outside_value());
}

/// Grows occupied regions by `radius`: each cell takes the minimum p_free over
/// all cells whose centres lie within `radius` of its own. Used to account for
/// depth uncertainty.
inline RasterField dilate(const RasterField& field, double radius)
{
  if (!(radius >= 0.0)) throw std::invalid_argument("dilate: radius must be >= 0");
  const auto& d = field.dims();
  const auto reach = static_cast<long>(std::floor(radius / field.cell_size()));
  if (reach == 0) return field;
  std::vector<std::array<long, 3>> offsets;
  const double r2 = (radius / field.cell_size()) * (radius / field.cell_size());
  for (long dz = -reach; dz <= reach; ++dz)
    for (long dy = -reach; dy <= reach; ++dy)
      for (long dx = -reach; dx <= reach; ++dx)
        if (static_cast<double>(dx * dx + dy * dy + dz * dz) <= r2) offsets.push_back({dx, dy, dz});

  std::vector<float> out(field.cell_count());
  for (std::size_t k = 0; k < d[2]; ++k)
    for (std::size_t j = 0; j < d[1]; ++j)
      for (std::size_t i = 0; i < d[0]; ++i) {
        float m = field.at(i, j, k);
        for (const auto& o : offsets) {
          const long ii = static_cast<long>(i) + o[0], jj = static_cast<long>(j) + o[1], kk = static_cast<long>(k) + o[2];
          if (ii < 0 || jj < 0 || kk < 0 || ii >= static_cast<long>(d[0]) || jj >= static_cast<long>(d[1]) ||
              kk >= static_cast<long>(d[2]))
            continue;
          m = std::min(m, field.at(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj), static_cast<std::size_t>(kk)));
        }
        out[field.index(i, j, k)] = m;
      }
  return RasterField(field.origin(), field.cell_size(), d, std::move(out), field.mode(), field.outside_value());
}

}  // namespace scc

#endif  // SCC_OCCUPANCY_HPP
