#pragma once

// Uniform box grids on R^n (n = 1, 2), balls, and nodal fields.
//
// Fields are extended outside the box by a constant (zero unless stated
// otherwise), so ball sums and convolutions silently truncate at the box edge.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sqfn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Points of R^n are stored in two coordinates; the second is zero for n = 1.
using Point = Eigen::Vector2d;

inline Point point(double x, double y = 0.0) { return Point(x, y); }

/// Relative tolerance under which a distance counts as lying on a sphere.
inline constexpr double kTieTolerance = 1e-12;

/// Sphere membership with explicit tie handling: ties (|d - R| within
/// kTieTolerance * R) are included for closed balls and excluded for open ones.
inline bool within_radius(double dist2, double radius, bool closed) {
  const double r2 = radius * radius;
  const double tie = 2.0 * kTieTolerance * r2;
  if (std::abs(dist2 - r2) <= tie) return closed;
  return dist2 < r2;
}

class Grid {
 public:
  static constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 22;

  Grid(int dim, double half_width, int points_per_axis,
       std::size_t node_budget = kDefaultNodeBudget)
      : dim_(dim), half_width_(half_width), m_(points_per_axis) {
    if (dim != 1 && dim != 2) throw Error("grid: dimension must be 1 or 2");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw Error("grid: half_width must be positive");
    if (points_per_axis < 9 || points_per_axis % 2 == 0)
      throw Error("grid: points_per_axis must be odd and >= 9");
    h_ = 2.0 * half_width / (m_ - 1);
    size_ = dim == 1 ? std::size_t(m_) : std::size_t(m_) * std::size_t(m_);
    if (size_ > node_budget) throw Error("grid: node count exceeds memory budget");
  }

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int points_per_axis() const { return m_; }
  double spacing() const { return h_; }
  std::size_t size() const { return size_; }
  /// Quadrature weight h^n of one node.
  double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }
  int center_index_1d() const { return (m_ - 1) / 2; }

  double coordinate(int i) const { return -half_width_ + i * h_; }

  std::array<int, 2> multi_index(std::size_t flat) const {
    if (dim_ == 1) return {int(flat), 0};
    return {int(flat % std::size_t(m_)), int(flat / std::size_t(m_))};
  }
  std::size_t flat_index(int i0, int i1 = 0) const {
    return dim_ == 1 ? std::size_t(i0) : std::size_t(i0) + std::size_t(m_) * std::size_t(i1);
  }
  bool in_range(int i0, int i1 = 0) const {
    if (i0 < 0 || i0 >= m_) return false;
    if (dim_ == 1) return i1 == 0;
    return i1 >= 0 && i1 < m_;
  }

  Point node(std::size_t flat) const {
    auto [i0, i1] = multi_index(flat);
    return dim_ == 1 ? point(coordinate(i0)) : point(coordinate(i0), coordinate(i1));
  }
  Point lattice_point(int i0, int i1) const {
    return dim_ == 1 ? point(coordinate(i0)) : point(coordinate(i0), coordinate(i1));
  }

  std::size_t origin_index() const {
    return flat_index(center_index_1d(), dim_ == 1 ? 0 : center_index_1d());
  }

  bool contains(const Point& p) const {
    const double tol = kTieTolerance * half_width_;
    for (int k = 0; k < dim_; ++k)
      if (std::abs(p[k]) > half_width_ + tol) return false;
    return true;
  }

  /// Nearest lattice index along one axis (may fall outside [0, m)).
  int nearest_lattice(double x) const { return int(std::lround((x + half_width_) / h_)); }

  std::size_t nearest_node(const Point& p) const {
    auto clamp = [&](int i) { return i < 0 ? 0 : (i >= m_ ? m_ - 1 : i); };
    const int i0 = clamp(nearest_lattice(p[0]));
    const int i1 = dim_ == 1 ? 0 : clamp(nearest_lattice(p[1]));
    return flat_index(i0, i1);
  }

  /// Same box, spacing halved.
  Grid refined() const { return Grid(dim_, half_width_, 2 * m_ - 1); }
  /// Same box, spacing doubled.
  Grid coarsened() const { return Grid(dim_, half_width_, (m_ + 1) / 2); }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && half_width_ == o.half_width_ && m_ == o.m_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

  std::string describe() const {
    std::ostringstream os;
    os << "grid(n=" << dim_ << ",L=" << half_width_ << ",m=" << m_ << ")";
    return os.str();
  }

 private:
  int dim_;
  double half_width_;
  int m_;
  double h_ = 0.0;
  std::size_t size_ = 0;
};

struct Ball {
  Point center = Point::Zero();
  double radius = 0.0;

  /// Lebesgue measure of the continuous ball.
  double volume(int dim) const {
    return dim == 1 ? 2.0 * radius : M_PI * radius * radius;
  }
  Ball scaled(double factor) const { return Ball{center, radius * factor}; }
};

/// Nodes of a ball; each carries quadrature weight h^n.
struct BallNodes {
  std::vector<std::size_t> indices;
  double node_weight = 0.0;

  std::size_t count() const { return indices.size(); }
  /// Discrete Lebesgue measure |B|_h = count * h^n.
  double measure() const { return double(indices.size()) * node_weight; }
};

/// Exactly the nodes with |node - center| <= radius, in flat-index order.
inline BallNodes ball_nodes(const Grid& grid, const Ball& ball) {
  if (!(ball.radius >= grid.spacing() * (1.0 - kTieTolerance)))
    throw Error("ball_nodes: radius below grid spacing");
  const double h = grid.spacing();
  const int reach = int(std::ceil(ball.radius / h)) + 1;
  const int c0 = grid.nearest_lattice(ball.center[0]);
  const int c1 = grid.dim() == 1 ? 0 : grid.nearest_lattice(ball.center[1]);
  const int span1 = grid.dim() == 1 ? 0 : reach;
  BallNodes out;
  out.node_weight = grid.cell_volume();
  for (int i1 = c1 - span1; i1 <= c1 + span1; ++i1) {
    for (int i0 = c0 - reach; i0 <= c0 + reach; ++i0) {
      if (!grid.in_range(i0, i1)) continue;
      const Point d = grid.lattice_point(i0, i1) - ball.center;
      if (within_radius(d.squaredNorm(), ball.radius, true))
        out.indices.push_back(grid.flat_index(i0, i1));
    }
  }
  if (out.indices.empty()) throw Error("ball_nodes: ball does not intersect the grid");
  return out;
}

template <std::floating_point Scalar>
class GridFunction {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  GridFunction(Grid grid, Values values, Scalar exterior = Scalar(0))
      : grid_(std::move(grid)), values_(std::move(values)), exterior_(exterior) {
    if (std::size_t(values_.size()) != grid_.size())
      throw Error("GridFunction: value count does not match grid");
    for (Eigen::Index i = 0; i < values_.size(); ++i)
      if (!std::isfinite(double(values_[i])))
        throw Error("GridFunction: non-finite value at node " + std::to_string(i));
    if (!std::isfinite(double(exterior_))) throw Error("GridFunction: non-finite exterior");
  }

  static GridFunction zero(const Grid& grid) {
    return GridFunction(grid, Values::Zero(Eigen::Index(grid.size())));
  }
  /// The constant c on all of R^n (exterior value c as well).
  static GridFunction constant(const Grid& grid, Scalar c) {
    return GridFunction(grid, Values::Constant(Eigen::Index(grid.size()), c), c);
  }

  const Grid& grid() const { return grid_; }
  const Values& values() const { return values_; }
  Scalar exterior() const { return exterior_; }
  Scalar operator[](std::size_t i) const { return values_[Eigen::Index(i)]; }
  std::size_t size() const { return grid_.size(); }

  /// Value at a lattice index that may lie outside the box.
  Scalar at_lattice(int i0, int i1 = 0) const {
    return grid_.in_range(i0, i1) ? values_[Eigen::Index(grid_.flat_index(i0, i1))] : exterior_;
  }

  /// Multilinear interpolation; exact on nodes.
  Scalar evaluate(const Point& p) const {
    const double h = grid_.spacing();
    const double L = grid_.half_width();
    const double u0 = (p[0] + L) / h;
    const int j0 = int(std::floor(u0));
    const double a0 = u0 - j0;
    if (grid_.dim() == 1) {
      if (a0 == 0.0) return at_lattice(j0);
      return Scalar((1.0 - a0) * at_lattice(j0) + a0 * at_lattice(j0 + 1));
    }
    const double u1 = (p[1] + L) / h;
    const int j1 = int(std::floor(u1));
    const double a1 = u1 - j1;
    if (a0 == 0.0 && a1 == 0.0) return at_lattice(j0, j1);
    return Scalar((1.0 - a0) * (1.0 - a1) * at_lattice(j0, j1) +
                  a0 * (1.0 - a1) * at_lattice(j0 + 1, j1) +
                  (1.0 - a0) * a1 * at_lattice(j0, j1 + 1) + a0 * a1 * at_lattice(j0 + 1, j1 + 1));
  }

  GridFunction scaled(Scalar c) const { return GridFunction(grid_, values_ * c, exterior_ * c); }
  GridFunction abs() const { return GridFunction(grid_, values_.abs(), std::abs(exterior_)); }

  friend GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    check_same(a, b);
    return GridFunction(a.grid_, a.values_ + b.values_, a.exterior_ + b.exterior_);
  }
  friend GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    check_same(a, b);
    return GridFunction(a.grid_, a.values_ - b.values_, a.exterior_ - b.exterior_);
  }
  friend GridFunction operator*(const GridFunction& a, const GridFunction& b) {
    check_same(a, b);
    return GridFunction(a.grid_, a.values_ * b.values_, a.exterior_ * b.exterior_);
  }
  friend GridFunction operator*(Scalar c, const GridFunction& a) { return a.scaled(c); }

  Scalar max_abs() const { return values_.size() ? values_.abs().maxCoeff() : Scalar(0); }

 private:
  static void check_same(const GridFunction& a, const GridFunction& b) {
    if (a.grid_ != b.grid_) throw Error("GridFunction: operands live on different grids");
  }

  Grid grid_;
  Values values_;
  Scalar exterior_;
};

template <std::floating_point Scalar>
class VecGridFunction {
 public:
  explicit VecGridFunction(std::vector<GridFunction<Scalar>> components)
      : components_(std::move(components)) {
    if (components_.empty()) throw Error("VecGridFunction: needs at least one component");
    for (const auto& c : components_)
      if (c.grid() != components_.front().grid())
        throw Error("VecGridFunction: components live on different grids");
  }

  const Grid& grid() const { return components_.front().grid(); }
  std::size_t components() const { return components_.size(); }
  const GridFunction<Scalar>& operator[](std::size_t j) const { return components_[j]; }
  const std::vector<GridFunction<Scalar>>& all() const { return components_; }

  VecGridFunction scaled(Scalar c) const {
    std::vector<GridFunction<Scalar>> out;
    for (const auto& comp : components_) out.push_back(comp.scaled(c));
    return VecGridFunction(std::move(out));
  }

 private:
  std::vector<GridFunction<Scalar>> components_;
};

using GridFunctiond = GridFunction<double>;
using VecGridFunctiond = VecGridFunction<double>;

/// Samples fn at every node; the exterior is zero.
template <std::floating_point Scalar = double, class Fn>
GridFunction<Scalar> sample(const Grid& grid, Fn&& fn) {
  typename GridFunction<Scalar>::Values values(Eigen::Index(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Point p = grid.node(i);
    const double v = double(fn(p));
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "sample: non-finite value at node " << i << " (" << p[0];
      if (grid.dim() == 2) os << ", " << p[1];
      os << ")";
      throw Error(os.str());
    }
    values[Eigen::Index(i)] = Scalar(v);
  }
  return GridFunction<Scalar>(grid, std::move(values));
}

/// Pointwise l2 norm across components.
template <std::floating_point Scalar>
GridFunction<Scalar> l2_pointwise(const VecGridFunction<Scalar>& vf) {
  typename GridFunction<Scalar>::Values acc =
      GridFunction<Scalar>::Values::Zero(Eigen::Index(vf.grid().size()));
  Scalar ext = 0;
  for (const auto& c : vf.all()) {
    acc += c.values().square();
    ext += c.exterior() * c.exterior();
  }
  return GridFunction<Scalar>(vf.grid(), acc.sqrt(), std::sqrt(ext));
}

}  // namespace sqfn
