#pragma once

// Discretized intrinsic square functions. Every operator reads a table of
// A_alpha f(t, y) (max over the dictionary of |f * phi_t(y)|) at the box nodes
// y and the scales of a ScaleGrid, then integrates over a cone, the vertical
// line, or the whole box with the g* decay weight.

#include "sqfn/grid.hpp"
#include "sqfn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace sqfn {

/// Scales for the dt/t integral, ascending, with log-trapezoid weights.
class ScaleGrid {
 public:
  /// t_i = t_max 2^{-i/steps_per_octave} down to t_min (inclusive to rounding).
  static ScaleGrid geometric(double t_min, double t_max, int steps_per_octave = 4) {
    if (!(t_min > 0.0) || !(t_max >= t_min)) throw Error("ScaleGrid: need 0 < t_min <= t_max");
    if (steps_per_octave < 1) throw Error("ScaleGrid: steps per octave must be positive");
    std::vector<double> t;
    for (int i = 0;; ++i) {
      const double v = t_max * std::exp2(-double(i) / steps_per_octave);
      if (v < t_min * (1.0 - kTieTolerance)) break;
      t.push_back(v);
    }
    std::reverse(t.begin(), t.end());
    return ScaleGrid(std::move(t));
  }

  /// Default for a grid: t in [h, 2L], ratio 2^{1/4}.
  static ScaleGrid for_grid(const Grid& g, int steps_per_octave = 4) {
    return geometric(g.spacing(), 2.0 * g.half_width(), steps_per_octave);
  }

  explicit ScaleGrid(std::vector<double> t) : t_(std::move(t)) {
    if (t_.empty()) throw Error("ScaleGrid: no scales");
    for (std::size_t i = 0; i < t_.size(); ++i) {
      if (!(t_[i] > 0.0)) throw Error("ScaleGrid: scales must be positive");
      if (i && !(t_[i] > t_[i - 1])) throw Error("ScaleGrid: scales must increase");
    }
    w_.assign(t_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
      const double half = 0.5 * std::log(t_[i + 1] / t_[i]);
      w_[i] += half;
      w_[i + 1] += half;
    }
    if (t_.size() == 1) w_[0] = 1.0;
  }

  std::size_t size() const { return t_.size(); }
  double operator[](std::size_t i) const { return t_[i]; }
  const std::vector<double>& values() const { return t_; }
  const std::vector<double>& log_weights() const { return w_; }
  double t_min() const { return t_.front(); }
  double t_max() const { return t_.back(); }

 private:
  std::vector<double> t_;
  std::vector<double> w_;
};

/// Per (scale, kernel) list of lattice offsets o with |o h| <= t and weights
/// h^n t^{-n} phi(o h / t); z = y - o.
struct Stencil {
  std::vector<int> d0, d1;
  std::vector<double> w;
  std::size_t size() const { return w.size(); }
};

template <std::floating_point Scalar>
class StencilBank {
 public:
  StencilBank(const Grid& grid, const KernelDictionary<Scalar>& dict, const ScaleGrid& scales)
      : grid_(grid), scales_(scales), kernels_(dict.size()), dict_id_(dict.id()) {
    if (dict.dim != grid.dim()) throw Error("StencilBank: dictionary and grid dimensions differ");
    const double h = grid.spacing();
    if (scales.t_min() < 0.5 * h) throw Error("StencilBank: scale below resolution");
    stencils_.resize(scales.size() * kernels_);
    for (std::size_t s = 0; s < scales.size(); ++s) {
      const double t = scales[s];
      const double scale = grid.cell_volume() / (grid.dim() == 1 ? t : t * t);
      const int reach = int(std::floor(t / h * (1.0 + kTieTolerance)));
      reach_ = std::max(reach_, reach);
      const int span1 = grid.dim() == 1 ? 0 : reach;
      for (std::size_t k = 0; k < kernels_; ++k) {
        Stencil& st = stencils_[s * kernels_ + k];
        for (int o1 = -span1; o1 <= span1; ++o1) {
          for (int o0 = -reach; o0 <= reach; ++o0) {
            const Point d = point(o0 * h, o1 * h);
            if (!within_radius(d.squaredNorm(), t, true)) continue;
            const double phi = double(dict.kernels[k].eval(d / t));
            if (phi == 0.0) continue;
            st.d0.push_back(o0);
            st.d1.push_back(o1);
            st.w.push_back(phi * scale);
          }
        }
      }
    }
  }

  const Grid& grid() const { return grid_; }
  const ScaleGrid& scales() const { return scales_; }
  std::size_t kernels() const { return kernels_; }
  const std::string& dictionary_id() const { return dict_id_; }
  int reach() const { return reach_; }
  const Stencil& at(std::size_t s, std::size_t k) const { return stencils_[s * kernels_ + k]; }

 private:
  Grid grid_;
  ScaleGrid scales_;
  std::size_t kernels_;
  std::string dict_id_;
  int reach_ = 0;
  std::vector<Stencil> stencils_;
};

namespace detail {

/// Field values on the box plus a collar of width `pad` holding the exterior value.
struct Padded {
  int m = 0, pad = 0, dim = 1, stride = 0;
  std::vector<double> v;

  template <std::floating_point Scalar>
  Padded(const GridFunction<Scalar>& f, int pad_)
      : m(f.grid().points_per_axis()), pad(pad_), dim(f.grid().dim()), stride(m + 2 * pad_) {
    const std::size_t rows = dim == 1 ? 1 : std::size_t(stride);
    v.assign(std::size_t(stride) * rows, double(f.exterior()));
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto [i0, i1] = f.grid().multi_index(i);
      v[index(i0, i1)] = double(f[i]);
    }
  }
  std::size_t index(int i0, int i1) const {
    return dim == 1 ? std::size_t(i0 + pad)
                    : std::size_t(i0 + pad) + std::size_t(stride) * std::size_t(i1 + pad);
  }
  double at(int i0, int i1) const { return v[index(i0, i1)]; }
};

/// sum_o w_o (f(y - o) - f(y))  (mean_zero) or sum_o w_o f(y - o).
inline double apply_stencil(const Stencil& st, const Padded& f, int i0, int i1, bool mean_zero) {
  double acc = 0.0;
  const double center = mean_zero ? f.at(i0, i1) : 0.0;
  for (std::size_t q = 0; q < st.size(); ++q)
    acc += st.w[q] * (f.at(i0 - st.d0[q], i1 - st.d1[q]) - center);
  return acc;
}

inline double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

inline double binomial(int k, int i) {
  double r = 1.0;
  for (int j = 1; j <= i; ++j) r = r * (k - i + j) / j;
  return r;
}

}  // namespace detail

/// A_alpha f(t_s, y) at every box node y and every scale; layout [s * N + node].
class AlphaTable {
 public:
  template <std::floating_point Scalar>
  AlphaTable(const GridFunction<Scalar>& f, const StencilBank<Scalar>& bank)
      : grid_(bank.grid()), scales_(bank.scales()), dict_id_(bank.dictionary_id()) {
    if (f.grid() != bank.grid()) throw Error("AlphaTable: field and stencils use different grids");
    const std::size_t n = grid_.size();
    const std::size_t S = scales_.size();
    data_.assign(S * n, 0.0);
    const detail::Padded pf(f, bank.reach() + 1);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
      auto [i0, i1] = grid_.multi_index(std::size_t(i));
      for (std::size_t s = 0; s < S; ++s) {
        double best = 0.0;
        for (std::size_t k = 0; k < bank.kernels(); ++k)
          best = std::max(best, std::abs(detail::apply_stencil(bank.at(s, k), pf, i0, i1, true)));
        data_[s * n + std::size_t(i)] = best;
      }
    }
  }

  const Grid& grid() const { return grid_; }
  const ScaleGrid& scales() const { return scales_; }
  const std::string& dictionary_id() const { return dict_id_; }
  double operator()(std::size_t s, std::size_t node) const { return data_[s * grid_.size() + node]; }

 private:
  Grid grid_;
  ScaleGrid scales_;
  std::string dict_id_;
  std::vector<double> data_;
};

struct SquareFunctionDiagnostics {
  std::string op;
  std::string dictionary_id;
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t scales = 0;
  /// Share of sum |f| on nodes within distance t_max of the box boundary.
  double truncation_mass = 0.0;
  /// Share of sum |f| on nodes within distance 2h of the box boundary.
  double edge_mass = 0.0;
};

template <std::floating_point Scalar>
struct SquareFunctionResult {
  GridFunction<Scalar> field;
  SquareFunctionDiagnostics diagnostics;
};

/// Share of sum |f| carried by nodes within `collar` of the box boundary.
template <std::floating_point Scalar>
double boundary_mass_fraction(const GridFunction<Scalar>& f, double collar) {
  const Grid& g = f.grid();
  double total = 0.0, near = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.node(i);
    double dist = g.half_width() - std::abs(p[0]);
    if (g.dim() == 2) dist = std::min(dist, g.half_width() - std::abs(p[1]));
    const double a = std::abs(double(f[i]));
    total += a;
    if (dist <= collar * (1.0 + kTieTolerance)) near += a;
  }
  return total > 0.0 ? near / total : 0.0;
}

namespace detail {

/// For row offset d1, the largest K with |(K, d1)| h inside radius (open or
/// closed); -1 if the row misses the ball. Index d1 + max_row.
struct DiskProfile {
  int max_row = 0;
  std::vector<int> half;

  DiskProfile(const Grid& g, double radius, bool closed) {
    const double h = g.spacing();
    const int reach = int(std::ceil(radius / h)) + 1;
    const int cap = g.points_per_axis();
    max_row = g.dim() == 1 ? 0 : std::min(reach, cap);
    half.assign(std::size_t(2 * max_row + 1), -1);
    for (int d1 = -max_row; d1 <= max_row; ++d1) {
      int k = -1;
      for (int c = 0; c <= std::min(reach, cap); ++c) {
        const double dist2 = h * h * double(c * c + d1 * d1);
        if (within_radius(dist2, radius, closed)) k = c;
        else if (dist2 > radius * radius) break;
      }
      half[std::size_t(d1 + max_row)] = k;
    }
  }
  int at(int d1) const { return half[std::size_t(d1 + max_row)]; }
};

template <std::floating_point Scalar>
SquareFunctionDiagnostics make_diagnostics(const std::string& op, const GridFunction<Scalar>& f,
                                           const ScaleGrid& scales, const std::string& dict_id) {
  SquareFunctionDiagnostics d;
  d.op = op;
  d.dictionary_id = dict_id;
  d.t_min = scales.t_min();
  d.t_max = scales.t_max();
  d.scales = scales.size();
  d.truncation_mass = boundary_mass_fraction(f, scales.t_max());
  d.edge_mass = boundary_mass_fraction(f, 2.0 * f.grid().spacing());
  return d;
}

template <std::floating_point Scalar>
GridFunction<Scalar> to_field(const Grid& g, const std::vector<double>& v) {
  typename GridFunction<Scalar>::Values vals(Eigen::Index(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) vals[Eigen::Index(i)] = Scalar(v[i]);
  return GridFunction<Scalar>(g, std::move(vals));
}

}  // namespace detail

/// Squared cone integral at every node x:
///   sum_s lw_s t_s^{-n} h^n sum_{y in box, |x - y| < beta t_s} A(s, y)^2,
/// with |x - y| <= beta t_s when `closed`.
inline std::vector<double> cone_square_sums(const AlphaTable& A, double beta, bool closed) {
  if (!(beta >= 1.0)) throw Error("cone integral: aperture must be >= 1");
  const Grid& g = A.grid();
  const int m = g.points_per_axis();
  const int rows = g.dim() == 1 ? 1 : m;
  const ScaleGrid& sc = A.scales();
  const std::size_t n = g.size();
  // Row prefix sums of A^2 per scale: prefix[s][row][0..m].
  std::vector<double> prefix(sc.size() * std::size_t(rows) * std::size_t(m + 1), 0.0);
  auto P = [&](std::size_t s, int row, int col) -> double& {
    return prefix[(s * std::size_t(rows) + std::size_t(row)) * std::size_t(m + 1) + std::size_t(col)];
  };
  for (std::size_t s = 0; s < sc.size(); ++s)
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < m; ++c) {
        const double a = A(s, g.flat_index(c, r));
        P(s, r, c + 1) = P(s, r, c) + a * a;
      }
  std::vector<detail::DiskProfile> disks;
  std::vector<double> coef;
  for (std::size_t s = 0; s < sc.size(); ++s) {
    disks.emplace_back(g, beta * sc[s], closed);
    coef.push_back(sc.log_weights()[s] * g.cell_volume() / (g.dim() == 1 ? sc[s] : sc[s] * sc[s]));
  }
  std::vector<double> out(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
    auto [x0, x1] = g.multi_index(std::size_t(i));
    double total = 0.0;
    for (std::size_t s = 0; s < sc.size(); ++s) {
      const auto& disk = disks[s];
      double acc = 0.0;
      for (int d1 = -disk.max_row; d1 <= disk.max_row; ++d1) {
        const int row = x1 + d1;
        const int k = disk.at(d1);
        if (k < 0 || row < 0 || row >= rows) continue;
        const int lo = std::max(0, x0 - k), hi = std::min(m, x0 + k + 1);
        if (hi > lo) acc += P(s, row, hi) - P(s, row, lo);
      }
      total += coef[s] * acc;
    }
    out[std::size_t(i)] = total;
  }
  return out;
}

/// Same sum at an arbitrary point, by direct geometric membership over box nodes.
inline double cone_square_sum_at(const AlphaTable& A, double beta, bool closed, const Point& x) {
  const Grid& g = A.grid();
  const ScaleGrid& sc = A.scales();
  double total = 0.0;
  for (std::size_t s = 0; s < sc.size(); ++s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!within_radius((g.node(j) - x).squaredNorm(), beta * sc[s], closed)) continue;
      acc += A(s, j) * A(s, j);
    }
    total += sc.log_weights()[s] * g.cell_volume() / (g.dim() == 1 ? sc[s] : sc[s] * sc[s]) * acc;
  }
  return total;
}

inline std::vector<double> vertical_square_sums(const AlphaTable& A) {
  const Grid& g = A.grid();
  const ScaleGrid& sc = A.scales();
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t s = 0; s < sc.size(); ++s) out[i] += sc.log_weights()[s] * A(s, i) * A(s, i);
  return out;
}

namespace detail {

/// (t / (t + |o| h))^{n lambda} for every lattice offset o in [-(m-1), m-1]^n.
struct DecayTable {
  int m = 0, dim = 1, side = 0;
  std::vector<double> v;  // [s][offset]

  DecayTable(const Grid& g, const ScaleGrid& sc, double lambda)
      : m(g.points_per_axis()), dim(g.dim()), side(2 * g.points_per_axis() - 1) {
    const std::size_t per = dim == 1 ? std::size_t(side) : std::size_t(side) * std::size_t(side);
    v.resize(sc.size() * per);
    const double h = g.spacing();
    const double e = g.dim() * lambda;
    for (std::size_t s = 0; s < sc.size(); ++s) {
      const double t = sc[s];
      for (std::size_t q = 0; q < per; ++q) {
        const int o0 = int(q % std::size_t(side)) - (m - 1);
        const int o1 = dim == 1 ? 0 : int(q / std::size_t(side)) - (m - 1);
        const double r = h * std::sqrt(double(o0 * o0 + o1 * o1));
        v[s * per + q] = std::pow(t / (t + r), e);
      }
    }
  }
  double at(std::size_t s, int o0, int o1) const {
    const std::size_t per = dim == 1 ? std::size_t(side) : std::size_t(side) * std::size_t(side);
    const std::size_t q = dim == 1 ? std::size_t(o0 + m - 1)
                                   : std::size_t(o0 + m - 1) + std::size_t(side) * std::size_t(o1 + m - 1);
    return v[s * per + q];
  }
};

}  // namespace detail

inline std::vector<double> gstar_square_sums(const AlphaTable& A, double lambda) {
  if (!(lambda > 1.0)) throw Error("g_star: lambda must exceed 1");
  const Grid& g = A.grid();
  const ScaleGrid& sc = A.scales();
  const std::size_t n = g.size();
  const detail::DecayTable decay(g, sc, lambda);
  std::vector<double> out(n, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
    auto [x0, x1] = g.multi_index(std::size_t(i));
    double total = 0.0;
    for (std::size_t s = 0; s < sc.size(); ++s) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        auto [y0, y1] = g.multi_index(j);
        const double a = A(s, j);
        acc += decay.at(s, y0 - x0, y1 - x1) * a * a;
      }
      total += sc.log_weights()[s] * g.cell_volume() / (g.dim() == 1 ? sc[s] : sc[s] * sc[s]) * acc;
    }
    out[std::size_t(i)] = total;
  }
  return out;
}

inline double gstar_square_sum_at(const AlphaTable& A, double lambda, const Point& x) {
  if (!(lambda > 1.0)) throw Error("g_star: lambda must exceed 1");
  const Grid& g = A.grid();
  const ScaleGrid& sc = A.scales();
  double total = 0.0;
  for (std::size_t s = 0; s < sc.size(); ++s) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double r = (g.node(j) - x).norm();
      acc += std::pow(sc[s] / (sc[s] + r), g.dim() * lambda) * A(s, j) * A(s, j);
    }
    total += sc.log_weights()[s] * g.cell_volume() / (g.dim() == 1 ? sc[s] : sc[s] * sc[s]) * acc;
  }
  return total;
}

/// g* squared split at every node: `core` collects |x - y| < t, annulus j
/// (1 <= j <= j_max) collects 2^{j-1} t <= |x - y| < 2^j t, and the last entry
/// of `annuli` holds everything beyond 2^{j_max} t. Sum of all parts = g*^2.
struct GstarSplit {
  std::vector<double> core;
  std::vector<std::vector<double>> annuli;
  int j_max = 0;
};

inline GstarSplit gstar_split(const AlphaTable& A, double lambda, int j_max) {
  if (!(lambda > 1.0)) throw Error("g_star: lambda must exceed 1");
  if (j_max < 1) throw Error("gstar_split: need j_max >= 1");
  const Grid& g = A.grid();
  const ScaleGrid& sc = A.scales();
  const std::size_t n = g.size();
  const detail::DecayTable decay(g, sc, lambda);
  GstarSplit out;
  out.j_max = j_max;
  out.core.assign(n, 0.0);
  out.annuli.assign(std::size_t(j_max + 1), std::vector<double>(n, 0.0));
  const double h = g.spacing();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(n); ++ii) {
    const std::size_t i = std::size_t(ii);
    auto [x0, x1] = g.multi_index(i);
    std::vector<double> parts(std::size_t(j_max + 2), 0.0);
    for (std::size_t s = 0; s < sc.size(); ++s) {
      const double t = sc[s];
      const double coef = sc.log_weights()[s] * g.cell_volume() / (g.dim() == 1 ? t : t * t);
      std::vector<double> acc(parts.size(), 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        auto [y0, y1] = g.multi_index(j);
        const int d0 = y0 - x0, d1 = y1 - x1;
        const double dist2 = h * h * double(d0 * d0 + d1 * d1);
        const double a = A(s, j);
        const double v = decay.at(s, d0, d1) * a * a;
        std::size_t slot = 0;
        if (!within_radius(dist2, t, false)) {
          slot = std::size_t(j_max + 1);
          for (int q = 1; q <= j_max; ++q)
            if (within_radius(dist2, std::ldexp(t, q), false)) {
              slot = std::size_t(q);
              break;
            }
        }
        acc[slot] += v;
      }
      for (std::size_t q = 0; q < parts.size(); ++q) parts[q] += coef * acc[q];
    }
    out.core[i] = parts[0];
    for (int q = 1; q <= j_max + 1; ++q) out.annuli[std::size_t(q - 1)][i] = parts[std::size_t(q)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scalar operators on whole fields.

template <std::floating_point Scalar>
SquareFunctionResult<Scalar> g_sq_field(const GridFunction<Scalar>& f, const StencilBank<Scalar>& bank,
                                        double beta = 1.0) {
  const AlphaTable A(f, bank);
  auto v = cone_square_sums(A, beta, false);
  for (double& x : v) x = std::sqrt(x);
  return {detail::to_field<Scalar>(f.grid(), v),
          detail::make_diagnostics("G", f, bank.scales(), bank.dictionary_id())};
}

/// Closed cone |x - y| <= 2^j t.
template <std::floating_point Scalar>
SquareFunctionResult<Scalar> g_sq_aperture_pow2_field(const GridFunction<Scalar>& f,
                                                      const StencilBank<Scalar>& bank, int j) {
  if (j < 0) throw Error("g_sq_aperture_pow2: j must be nonnegative");
  const AlphaTable A(f, bank);
  auto v = cone_square_sums(A, std::ldexp(1.0, j), true);
  for (double& x : v) x = std::sqrt(x);
  return {detail::to_field<Scalar>(f.grid(), v),
          detail::make_diagnostics("G_pow2", f, bank.scales(), bank.dictionary_id())};
}

template <std::floating_point Scalar>
SquareFunctionResult<Scalar> g_vertical_field(const GridFunction<Scalar>& f,
                                              const StencilBank<Scalar>& bank) {
  const AlphaTable A(f, bank);
  auto v = vertical_square_sums(A);
  for (double& x : v) x = std::sqrt(x);
  return {detail::to_field<Scalar>(f.grid(), v),
          detail::make_diagnostics("g", f, bank.scales(), bank.dictionary_id())};
}

template <std::floating_point Scalar>
SquareFunctionResult<Scalar> g_star_field(const GridFunction<Scalar>& f, const StencilBank<Scalar>& bank,
                                          double lambda) {
  const AlphaTable A(f, bank);
  auto v = gstar_square_sums(A, lambda);
  for (double& x : v) x = std::sqrt(x);
  return {detail::to_field<Scalar>(f.grid(), v),
          detail::make_diagnostics("g_star", f, bank.scales(), bank.dictionary_id())};
}

// ---------------------------------------------------------------------------
// Point evaluations.

/// max over the dictionary of |f * phi_t(y)|.
template <std::floating_point Scalar>
Scalar a_alpha(const GridFunction<Scalar>& f, const KernelDictionary<Scalar>& dict, const Point& y,
               double t) {
  Scalar best = 0;
  for (const auto& k : dict.kernels) best = std::max(best, std::abs(dilated_convolve(f, k, t, y)));
  return best;
}

template <std::floating_point Scalar>
Scalar g_sq(const GridFunction<Scalar>& f, const KernelDictionary<Scalar>& dict,
            const ScaleGrid& scales, double beta, const Point& x) {
  const StencilBank<Scalar> bank(f.grid(), dict, scales);
  return Scalar(std::sqrt(cone_square_sum_at(AlphaTable(f, bank), beta, false, x)));
}

template <std::floating_point Scalar>
Scalar g_sq_aperture_pow2(const GridFunction<Scalar>& f, const KernelDictionary<Scalar>& dict,
                          const ScaleGrid& scales, int j, const Point& x) {
  if (j < 0) throw Error("g_sq_aperture_pow2: j must be nonnegative");
  const StencilBank<Scalar> bank(f.grid(), dict, scales);
  return Scalar(std::sqrt(cone_square_sum_at(AlphaTable(f, bank), std::ldexp(1.0, j), true, x)));
}

template <std::floating_point Scalar>
Scalar g_vertical(const GridFunction<Scalar>& f, const KernelDictionary<Scalar>& dict,
                  const ScaleGrid& scales, const Point& x) {
  double acc = 0.0;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double a = double(a_alpha(f, dict, x, scales[s]));
    acc += scales.log_weights()[s] * a * a;
  }
  return Scalar(std::sqrt(acc));
}

template <std::floating_point Scalar>
Scalar g_star(const GridFunction<Scalar>& f, const KernelDictionary<Scalar>& dict,
              const ScaleGrid& scales, double lambda, const Point& x) {
  const StencilBank<Scalar> bank(f.grid(), dict, scales);
  return Scalar(std::sqrt(gstar_square_sum_at(AlphaTable(f, bank), lambda, x)));
}

// ---------------------------------------------------------------------------
// k-th order commutators.
//
// [b(x) - b(z)]^k is expanded binomially in the centred symbol
// c = b - b(origin node), so one table of conv(c^i f) per kernel serves every
// outer point x. The inner convolution uses the same mean-zero form as A_alpha,
// applied to z -> [b(x) - b(z)]^k f(z).

template <std::floating_point Scalar>
class CommutatorTables {
 public:
  CommutatorTables(const GridFunction<Scalar>& f, const GridFunction<Scalar>& b, int korder,
                   const StencilBank<Scalar>& bank)
      : grid_(bank.grid()), scales_(bank.scales()), kernels_(bank.kernels()), k_(korder) {
    if (korder < 1 || korder > 3) throw Error("commutator: order must be 1, 2 or 3");
    if (f.grid() != grid_ || b.grid() != grid_)
      throw Error("commutator: fields and stencils use different grids");
    const Scalar b0 = b[grid_.origin_index()];
    const GridFunction<Scalar> c(grid_, b.values() - b0, b.exterior() - b0);
    centred_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) centred_[i] = double(c[i]);
    const std::size_t n = grid_.size();
    table_.assign(std::size_t(k_ + 1) * scales_.size() * kernels_ * n, 0.0);
    GridFunction<Scalar> power = f;
    for (int p = 0; p <= k_; ++p) {
      const detail::Padded pf(power, bank.reach() + 1);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i) {
        auto [i0, i1] = grid_.multi_index(std::size_t(i));
        for (std::size_t s = 0; s < scales_.size(); ++s)
          for (std::size_t q = 0; q < kernels_; ++q)
            table_[index(p, s, q, std::size_t(i))] =
                detail::apply_stencil(bank.at(s, q), pf, i0, i1, true);
      }
      power = power * c;
    }
    for (int p = 0; p <= k_; ++p) binom_.push_back(detail::binomial(k_, p));
  }

  const Grid& grid() const { return grid_; }
  const ScaleGrid& scales() const { return scales_; }
  int order() const { return k_; }

  /// A^k_{alpha,b} f(t_s, y) for the outer symbol value cx = c(x).
  double value(std::size_t s, std::size_t node, double cx) const {
    double best = 0.0;
    for (std::size_t q = 0; q < kernels_; ++q) {
      double acc = 0.0;
      for (int p = 0; p <= k_; ++p) {
        const double sign = (p % 2) ? -1.0 : 1.0;
        acc += sign * binom_[std::size_t(p)] * detail::pow_int(cx, k_ - p) * table_[index(p, s, q, node)];
      }
      best = std::max(best, std::abs(acc));
    }
    return best;
  }
  /// Centred symbol at a node.
  double centred(std::size_t node) const { return centred_[node]; }

 private:
  std::size_t index(int p, std::size_t s, std::size_t q, std::size_t i) const {
    return ((std::size_t(p) * scales_.size() + s) * kernels_ + q) * grid_.size() + i;
  }

  Grid grid_;
  ScaleGrid scales_;
  std::size_t kernels_;
  int k_;
  std::vector<double> centred_;
  std::vector<double> binom_;
  std::vector<double> table_;
};

template <std::floating_point Scalar>
bool is_constant(const GridFunction<Scalar>& b) {
  const Scalar v0 = b[0];
  return (b.values() == v0).all() && b.exterior() == v0;
}

namespace detail {

enum class CommKind { Cone, Vertical, Star };

template <std::floating_point Scalar>
std::vector<double> comm_square_sums(const CommutatorTables<Scalar>& T, CommKind kind, double beta,
                                     double lambda) {
  const Grid& g = T.grid();
  const ScaleGrid& sc = T.scales();
  const std::size_t n = g.size();
  const int m = g.points_per_axis();
  const int rows = g.dim() == 1 ? 1 : m;
  std::vector<DiskProfile> disks;
  if (kind == CommKind::Cone)
    for (std::size_t s = 0; s < sc.size(); ++s) disks.emplace_back(g, beta * sc[s], false);
  std::unique_ptr<DecayTable> decay;
  if (kind == CommKind::Star) decay = std::make_unique<DecayTable>(g, sc, lambda);
  std::vector<double> out(n, 0.0);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(n); ++ii) {
    const std::size_t i = std::size_t(ii);
    auto [x0, x1] = g.multi_index(i);
    const double cx = T.centred(i);
    double total = 0.0;
    for (std::size_t s = 0; s < sc.size(); ++s) {
      const double coef = g.cell_volume() / (g.dim() == 1 ? sc[s] : sc[s] * sc[s]);
      double acc = 0.0;
      if (kind == CommKind::Vertical) {
        const double a = T.value(s, i, cx);
        total += sc.log_weights()[s] * a * a;
        continue;
      }
      if (kind == CommKind::Cone) {
        const auto& disk = disks[s];
        for (int d1 = -disk.max_row; d1 <= disk.max_row; ++d1) {
          const int row = x1 + d1;
          const int k = disk.at(d1);
          if (k < 0 || row < 0 || row >= rows) continue;
          for (int c = std::max(0, x0 - k); c < std::min(m, x0 + k + 1); ++c) {
            const double a = T.value(s, g.flat_index(c, row), cx);
            acc += a * a;
          }
        }
      } else {
        for (std::size_t j = 0; j < n; ++j) {
          auto [y0, y1] = g.multi_index(j);
          const double a = T.value(s, j, cx);
          acc += decay->at(s, y0 - x0, y1 - x1) * a * a;
        }
      }
      total += sc.log_weights()[s] * coef * acc;
    }
    out[i] = total;
  }
  return out;
}

}  // namespace detail

template <std::floating_point Scalar>
SquareFunctionResult<Scalar> comm_g_sq_field(const GridFunction<Scalar>& f, const StencilBank<Scalar>& bank,
                                             const GridFunction<Scalar>& b, int korder,
                                             double beta = 1.0) {
  auto diag = detail::make_diagnostics("[b,G]^k", f, bank.scales(), bank.dictionary_id());
  if (korder < 1 || korder > 3) throw Error("commutator: order must be 1, 2 or 3");
  if (is_constant(b)) return {GridFunction<Scalar>::zero(f.grid()), diag};
  const CommutatorTables<Scalar> T(f, b, korder, bank);
  auto v = detail::comm_square_sums(T, detail::CommKind::Cone, beta, 0.0);
  for (double& x : v) x = std::sqrt(x);
  return {detail::to_field<Scalar>(f.grid(), v), diag};
}

template <std::floating_point Scalar>
SquareFunctionResult<Scalar> comm_g_vertical_field(const GridFunction<Scalar>& f,
                                                   const StencilBank<Scalar>& bank,
                                                   const GridFunction<Scalar>& b, int korder) {
  auto diag = detail::make_diagnostics("[b,g]^k", f, bank.scales(), bank.dictionary_id());
  if (korder < 1 || korder > 3) throw Error("commutator: order must be 1, 2 or 3");
  if (is_constant(b)) return {GridFunction<Scalar>::zero(f.grid()), diag};
  const CommutatorTables<Scalar> T(f, b, korder, bank);
  auto v = detail::comm_square_sums(T, detail::CommKind::Vertical, 1.0, 0.0);
  for (double& x : v) x = std::sqrt(x);
  return {detail::to_field<Scalar>(f.grid(), v), diag};
}

template <std::floating_point Scalar>
SquareFunctionResult<Scalar> comm_g_star_field(const GridFunction<Scalar>& f,
                                               const StencilBank<Scalar>& bank,
                                               const GridFunction<Scalar>& b, int korder,
                                               double lambda) {
  auto diag = detail::make_diagnostics("[b,g_star]^k", f, bank.scales(), bank.dictionary_id());
  if (korder < 1 || korder > 3) throw Error("commutator: order must be 1, 2 or 3");
  if (!(lambda > 1.0)) throw Error("g_star: lambda must exceed 1");
  if (is_constant(b)) return {GridFunction<Scalar>::zero(f.grid()), diag};
  const CommutatorTables<Scalar> T(f, b, korder, bank);
  auto v = detail::comm_square_sums(T, detail::CommKind::Star, 1.0, lambda);
  for (double& x : v) x = std::sqrt(x);
  return {detail::to_field<Scalar>(f.grid(), v), diag};
}

/// max over the dictionary of |sum_z h^n t^{-n} phi((y - z)/t) (g(z) - g(y))|,
/// g(z) = [b(x) - b(z)]^k f(z).
template <std::floating_point Scalar>
Scalar a_alpha_comm(const GridFunction<Scalar>& f, const KernelDictionary<Scalar>& dict,
                    const GridFunction<Scalar>& b, int korder, const Point& x, const Point& y,
                    double t) {
  if (korder < 1 || korder > 3) throw Error("commutator: order must be 1, 2 or 3");
  const Grid& g = f.grid();
  if (b.grid() != g) throw Error("commutator: f and b use different grids");
  if (!(t >= 0.5 * g.spacing())) throw Error("a_alpha_comm: scale below resolution");
  const double bx = double(b.evaluate(x));
  const double gy = detail::pow_int(bx - double(b.evaluate(y)), korder) * double(f.evaluate(y));
  const double h = g.spacing();
  const double scale = g.cell_volume() / (g.dim() == 1 ? t : t * t);
  const int reach = int(std::ceil(t / h)) + 1;
  const int c0 = g.nearest_lattice(y[0]);
  const int c1 = g.dim() == 1 ? 0 : g.nearest_lattice(y[1]);
  const int span1 = g.dim() == 1 ? 0 : reach;
  double best = 0.0;
  for (const auto& k : dict.kernels) {
    double acc = 0.0;
    for (int i1 = c1 - span1; i1 <= c1 + span1; ++i1)
      for (int i0 = c0 - reach; i0 <= c0 + reach; ++i0) {
        const Point d = y - g.lattice_point(i0, i1);
        if (!within_radius(d.squaredNorm(), t, true)) continue;
        const double phi = double(k.eval(d / t));
        if (phi == 0.0) continue;
        acc += phi * (detail::pow_int(bx - double(b.at_lattice(i0, i1)), korder) *
                          double(f.at_lattice(i0, i1)) - gy);
      }
    best = std::max(best, std::abs(acc * scale));
  }
  return Scalar(best);
}

// ---------------------------------------------------------------------------
// Vector-valued wrappers.

/// Applies a scalar field operator to every component and takes the pointwise l2 norm.
template <std::floating_point Scalar, class Op>
GridFunction<Scalar> vector_apply(Op&& op, const VecGridFunction<Scalar>& vf) {
  std::vector<GridFunction<Scalar>> parts;
  for (const auto& comp : vf.all()) {
    GridFunction<Scalar> out = [&]() -> GridFunction<Scalar> {
      if constexpr (requires { op(comp).field; }) return op(comp).field;
      else return op(comp);
    }();
    parts.push_back(std::move(out));
  }
  return l2_pointwise(VecGridFunction<Scalar>(std::move(parts)));
}

}  // namespace sqfn
