#pragma once

// Brute-force reference implementations. Each walks the lattice directly from
// the definitions: no stencils, no padding, no prefix sums, no shortcuts.

#include "sqfn/ball_family.hpp"
#include "sqfn/grid.hpp"
#include "sqfn/kernels.hpp"
#include "sqfn/operators.hpp"
#include "sqfn/weights.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using sqfn::Grid;
using sqfn::GridFunctiond;
using sqfn::KernelDictionary;
using sqfn::Point;
using sqfn::ScaleGrid;

/// |d| < r, or |d| <= r when closed; squared distances within 2e-12 r^2 of r^2 are ties.
inline bool inside(double d2, double r, bool closed) {
  const double r2 = r * r;
  if (std::abs(d2 - r2) <= 2e-12 * r2) return closed;
  return d2 < r2;
}

/// Lattice index range covering the box plus a collar of `pad` nodes.
struct LatticeScan {
  int lo, hi, lo1, hi1;
  LatticeScan(const Grid& g, int pad)
      : lo(-pad), hi(g.points_per_axis() - 1 + pad), lo1(g.dim() == 1 ? 0 : -pad),
        hi1(g.dim() == 1 ? 0 : g.points_per_axis() - 1 + pad) {}
};

/// Values of a function of the lattice index (exterior handled by the caller).
template <class Fn>
double conv_mean_zero(const Grid& g, const sqfn::TestKernel<double>& k, double t, int y0, int y1, Fn&& val) {
  const int pad = int(std::ceil(t / g.spacing())) + 2;
  const LatticeScan sc(g, pad);
  const Point y = g.lattice_point(y0, y1);
  const double fy = val(y0, y1);
  double acc = 0.0;
  for (int i1 = sc.lo1; i1 <= sc.hi1; ++i1)
    for (int i0 = sc.lo; i0 <= sc.hi; ++i0) {
      const Point z = g.lattice_point(i0, i1);
      const Point d = y - z;
      if (!inside(d.squaredNorm(), t, true)) continue;
      acc += k.eval(d / t) * (val(i0, i1) - fy);
    }
  return acc * std::pow(g.spacing(), g.dim()) / std::pow(t, g.dim());
}

/// A(s, node) = max_k |conv|.
template <class Fn>
std::vector<double> alpha_table(const Grid& g, const KernelDictionary<double>& dict, const ScaleGrid& scales,
                                Fn&& val) {
  std::vector<double> out(scales.size() * g.size(), 0.0);
  for (std::size_t s = 0; s < scales.size(); ++s)
    for (std::size_t j = 0; j < g.size(); ++j) {
      auto [y0, y1] = g.multi_index(j);
      double best = 0.0;
      for (const auto& k : dict.kernels) best = std::max(best, std::abs(conv_mean_zero(g, k, scales[s], y0, y1, val)));
      out[s * g.size() + j] = best;
    }
  return out;
}

inline auto field_values(const GridFunctiond& f) {
  return [&f](int i0, int i1) { return f.at_lattice(i0, i1); };
}

enum class Kind { Cone, Vertical, Star };

/// Squared operator at node x from an A table.
inline double integrate(const Grid& g, const ScaleGrid& scales, const std::vector<double>& A, std::size_t x,
                        Kind kind, double beta, bool closed, double lambda) {
  const Point px = g.node(x);
  double total = 0.0;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const double t = scales[s];
    const double lw = scales.log_weights()[s];
    if (kind == Kind::Vertical) {
      total += lw * A[s * g.size() + x] * A[s * g.size() + x];
      continue;
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double a = A[s * g.size() + j];
      const double r = (g.node(j) - px).norm();
      if (kind == Kind::Cone) {
        if (inside(r * r, beta * t, closed)) acc += a * a;
      } else {
        acc += std::pow(t / (t + r), g.dim() * lambda) * a * a;
      }
    }
    total += lw * std::pow(g.spacing(), g.dim()) / std::pow(t, g.dim()) * acc;
  }
  return total;
}

/// G_beta, g or g* of f at every node (not squared).
inline std::vector<double> square_function(const GridFunctiond& f, const KernelDictionary<double>& dict,
                                           const ScaleGrid& scales, Kind kind, double beta = 1.0,
                                           bool closed = false, double lambda = 2.0) {
  const Grid& g = f.grid();
  const auto A = alpha_table(g, dict, scales, field_values(f));
  std::vector<double> out(g.size());
  for (std::size_t x = 0; x < g.size(); ++x)
    out[x] = std::sqrt(integrate(g, scales, A, x, kind, beta, closed, lambda));
  return out;
}

/// k-th order commutator: the operator applied to z -> (b(x) - b(z))^k f(z), separately per x.
inline std::vector<double> commutator(const GridFunctiond& f, const GridFunctiond& b, int korder,
                                      const KernelDictionary<double>& dict, const ScaleGrid& scales, Kind kind,
                                      double beta = 1.0, double lambda = 2.0) {
  const Grid& g = f.grid();
  std::vector<double> out(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    const double bx = b[x];
    auto gx = [&](int i0, int i1) { return std::pow(bx - b.at_lattice(i0, i1), korder) * f.at_lattice(i0, i1); };
    const auto A = alpha_table(g, dict, scales, gx);
    out[x] = std::sqrt(integrate(g, scales, A, x, kind, beta, false, lambda));
  }
  return out;
}

/// Nodes of the closed ball, by scanning the whole box.
inline std::vector<std::size_t> ball(const Grid& g, const sqfn::Ball& b) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (inside((g.node(i) - b.center).squaredNorm(), b.radius, true)) out.push_back(i);
  return out;
}

inline double weight_measure(const sqfn::Weight& w, const sqfn::Ball& b) {
  const Grid& g = w.grid();
  double s = 0.0;
  for (std::size_t i : ball(g, b)) s += w[i] * std::pow(g.spacing(), g.dim());
  return s;
}

inline double lp(const GridFunctiond& f, const sqfn::Weight& w, double p, const sqfn::Ball& b) {
  const Grid& g = f.grid();
  double s = 0.0;
  for (std::size_t i : ball(g, b)) s += std::pow(std::abs(f[i]), p) * w[i] * std::pow(g.spacing(), g.dim());
  return std::pow(s, 1.0 / p);
}

/// sup_{tau > 0} tau w({|f| > tau} cap B)^{1/p}; the sup is approached as tau rises to a node value v,
/// where the level set is {|f| >= v}. Quadratic scan.
inline double weak_lp(const GridFunctiond& f, const sqfn::Weight& w, double p, const sqfn::Ball& b) {
  const Grid& g = f.grid();
  const auto nodes = ball(g, b);
  double best = 0.0;
  for (std::size_t i : nodes) {
    const double v = std::abs(f[i]);
    if (v == 0.0) continue;
    double mass = 0.0;
    for (std::size_t j : nodes)
      if (std::abs(f[j]) >= v) mass += w[j];
    best = std::max(best, v * std::pow(mass * std::pow(g.spacing(), g.dim()), 1.0 / p));
  }
  return best;
}

/// sup over balls of (1/|B|) sum |b - b_B| h^n, b_B the plain mean.
inline double bmo(const GridFunctiond& b, const std::vector<sqfn::Ball>& balls) {
  double best = 0.0;
  for (const auto& B : balls) {
    const auto nodes = ball(b.grid(), B);
    double mean = 0.0;
    for (std::size_t i : nodes) mean += b[i];
    mean /= double(nodes.size());
    double osc = 0.0;
    for (std::size_t i : nodes) osc += std::abs(b[i] - mean);
    best = std::max(best, osc / double(nodes.size()));
  }
  return best;
}

/// sup_B (w(B)/|B|) (sigma(B)/|B|)^{p-1}, sigma = w^{1-p'}.
inline double ap(const sqfn::Weight& w, double p, const std::vector<sqfn::Ball>& balls) {
  const double e = 1.0 - p / (p - 1.0);
  double best = 0.0;
  for (const auto& B : balls) {
    const auto nodes = ball(w.grid(), B);
    double sw = 0.0, ss = 0.0;
    for (std::size_t i : nodes) {
      sw += w[i];
      ss += std::pow(w[i], e);
    }
    const double N = double(nodes.size());
    best = std::max(best, (sw / N) * std::pow(ss / N, p - 1.0));
  }
  return best;
}

/// max_i |a_i - b_i| / max_i |b_i| (0 when both vanish).
template <class A, class B>
double rel_sup(const A& a, const B& b, std::size_t n) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num = std::max(num, std::abs(double(a[i]) - double(b[i])));
    den = std::max(den, std::abs(double(b[i])));
  }
  if (den == 0.0) return num;
  return num / den;
}

}  // namespace oracle
