#pragma once

// Finite (center, radius) collections standing in for sup over all balls.

#include "sqfn/grid.hpp"

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace sqfn {

class BallFamily {
 public:
  /// Centers on a sub-lattice of nodes spanning [-center_extent, center_extent]^n
  /// (centers_per_axis of them, snapped to nodes) times log-spaced radii in
  /// [r_min, r_max].
  static BallFamily lattice(const Grid& grid, int centers_per_axis, double center_extent,
                            int radii, double r_min, double r_max) {
    if (centers_per_axis < 1 || radii < 1) throw Error("BallFamily: empty family");
    if (!(r_min > 0.0) || r_max < r_min) throw Error("BallFamily: bad radius range");
    if (r_min < grid.spacing() * (1.0 - kTieTolerance))
      throw Error("BallFamily: radius below grid resolution");
    if (center_extent > grid.half_width() * (1.0 + kTieTolerance) || center_extent < 0.0)
      throw Error("BallFamily: centers outside the box");
    BallFamily fam;
    fam.grid_ = grid;
    fam.centers_per_axis_ = centers_per_axis;
    fam.center_extent_ = center_extent;
    fam.radius_count_ = radii;
    fam.r_min_ = r_min;
    fam.r_max_ = r_max;

    std::vector<double> axis;
    for (int i = 0; i < centers_per_axis; ++i) {
      const double x = centers_per_axis == 1
                           ? 0.0
                           : -center_extent + 2.0 * center_extent * i / (centers_per_axis - 1);
      axis.push_back(grid.coordinate(grid.nearest_lattice(x)));
    }
    if (grid.dim() == 1) {
      for (double x : axis) fam.centers_.push_back(point(x));
    } else {
      for (double y : axis)
        for (double x : axis) fam.centers_.push_back(point(x, y));
    }
    for (int i = 0; i < radii; ++i) {
      const double r = radii == 1 ? r_max
                                  : r_min * std::pow(r_max / r_min, double(i) / (radii - 1));
      fam.radii_.push_back(r);
    }
    for (const Point& c : fam.centers_)
      for (double r : fam.radii_) fam.balls_.push_back(Ball{c, r});
    fam.id_ = fam.make_id();
    return fam;
  }

  /// Twofold enlargement: center and radius midpoints inserted, so the result
  /// is a superset covering the same ranges.
  BallFamily enlarged() const {
    return lattice(grid_, 2 * centers_per_axis_ - 1, center_extent_, 2 * radius_count_ - 1,
                   r_min_, r_max_);
  }

  /// Same physical balls on another grid.
  BallFamily on(const Grid& grid) const {
    return lattice(grid, centers_per_axis_, center_extent_, radius_count_, r_min_, r_max_);
  }

  const Grid& grid() const { return grid_; }
  const std::vector<Ball>& balls() const { return balls_; }
  const std::vector<Point>& centers() const { return centers_; }
  const std::vector<double>& radii() const { return radii_; }
  std::size_t size() const { return balls_.size(); }
  const std::string& id() const { return id_; }

 private:
  BallFamily() : grid_(1, 1.0, 9) {}

  std::string make_id() const {
    // FNV-1a over the parameter description; stable across runs and machines.
    std::ostringstream os;
    os << std::setprecision(17) << grid_.dim() << ':' << grid_.half_width() << ':'
       << grid_.points_per_axis() << ':' << centers_per_axis_ << ':' << center_extent_ << ':'
       << radius_count_ << ':' << r_min_ << ':' << r_max_;
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char ch : os.str()) {
      hash ^= ch;
      hash *= 1099511628211ull;
    }
    std::ostringstream id;
    id << "fam-" << centers_per_axis_ << 'x' << radius_count_ << '-' << std::hex
       << std::setw(16) << std::setfill('0') << hash;
    return id.str();
  }

  Grid grid_;
  int centers_per_axis_ = 0;
  double center_extent_ = 0.0;
  int radius_count_ = 0;
  double r_min_ = 0.0;
  double r_max_ = 0.0;
  std::vector<Point> centers_;
  std::vector<double> radii_;
  std::vector<Ball> balls_;
  std::string id_;
};

}  // namespace sqfn
