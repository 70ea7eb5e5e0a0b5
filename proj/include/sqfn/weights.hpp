#pragma once

// Weights on the grid, weighted ball measures, and the Muckenhoupt, doubling
// and reverse-doubling diagnostics computed over a finite ball family.

#include "sqfn/ball_family.hpp"
#include "sqfn/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace sqfn {

class Weight {
 public:
  enum class Kind { Constant, Power, Tabulated };

  static Weight constant(const Grid& grid, double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error("Weight: constant must be positive");
    Weight w(grid, Kind::Constant, c);
    w.values_ = GridFunctiond::constant(grid, c);
    return w;
  }

  /// |x|^gamma; nodes closer to the origin than h/2 (the origin node) take (h/2)^gamma.
  static Weight power(const Grid& grid, double gamma) {
    if (!std::isfinite(gamma)) throw Error("Weight: exponent must be finite");
    Weight w(grid, Kind::Power, gamma);
    const double floor = 0.5 * grid.spacing();
    w.values_ = sample(grid, [&](const Point& x) { return std::pow(std::max(x.norm(), floor), gamma); });
    w.check_positive();
    return w;
  }

  static Weight tabulated(const GridFunctiond& values) {
    Weight w(values.grid(), Kind::Tabulated, 0.0);
    w.values_ = values;
    w.check_positive();
    return w;
  }

  Kind kind() const { return kind_; }
  /// The constant c, or the exponent gamma; zero for tabulated weights.
  double parameter() const { return param_; }
  const Grid& grid() const { return values_.grid(); }
  const GridFunctiond& nodal() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::string kind_name() const {
    switch (kind_) {
      case Kind::Constant: return "constant";
      case Kind::Power: return "power";
      default: return "tabulated";
    }
  }

  std::string describe() const {
    std::ostringstream os;
    if (kind_ == Kind::Constant) os << "const(" << param_ << ")";
    else if (kind_ == Kind::Power) os << "|x|^" << param_;
    else os << "tabulated";
    return os.str();
  }

  /// Pointwise value off the grid, with the same origin regularization.
  double value_at(const Point& x) const {
    switch (kind_) {
      case Kind::Constant: return param_;
      case Kind::Power: return std::pow(std::max(x.norm(), 0.5 * grid().spacing()), param_);
      default: return double(values_.evaluate(x));
    }
  }

  /// Same analytic weight on another grid; tabulated weights cannot be moved.
  Weight on(const Grid& grid) const {
    if (kind_ == Kind::Constant) return constant(grid, param_);
    if (kind_ == Kind::Power) return power(grid, param_);
    if (grid != this->grid()) throw Error("Weight: tabulated weight is bound to its grid");
    return *this;
  }

  /// w^s, preserving the analytic descriptor.
  Weight power_of(double s) const {
    if (kind_ == Kind::Constant) return constant(grid(), std::pow(param_, s));
    if (kind_ == Kind::Power) return power(grid(), param_ * s);
    return tabulated(GridFunctiond(grid(), values_.values().pow(s), std::pow(values_.exterior(), s)));
  }

  /// The dual weight w^{1-p'} = w^{-1/(p-1)}.
  Weight dual(double p) const {
    if (!(p > 1.0)) throw Error("Weight: dual weight needs p > 1");
    return power_of(-1.0 / (p - 1.0));
  }

  bool has_closed_form() const { return kind_ != Kind::Tabulated; }

 private:
  Weight(const Grid& grid, Kind kind, double param)
      : kind_(kind), param_(param), values_(GridFunctiond::zero(grid)) {}

  void check_positive() const {
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
        throw Error("Weight: values must be finite and positive (node " + std::to_string(i) + ")");
  }

  Kind kind_;
  double param_;
  GridFunctiond values_;
};

/// w(B) = h^n sum over ball nodes of w.
inline double measure(const Weight& w, const Ball& ball) {
  const BallNodes nodes = ball_nodes(w.grid(), ball);
  double s = 0.0;
  for (std::size_t i : nodes.indices) s += w[i];
  return s * nodes.node_weight;
}

inline double measure(const Weight& w, const BallNodes& nodes) {
  double s = 0.0;
  for (std::size_t i : nodes.indices) s += w[i];
  return s * nodes.node_weight;
}

namespace detail {

/// Integral of |x|^gamma over [a, b] (gamma > -1).
inline double power_integral_1d(double a, double b, double gamma) {
  auto F = [gamma](double x) {
    const double v = std::pow(std::abs(x), gamma + 1.0) / (gamma + 1.0);
    return x < 0.0 ? -v : v;
  };
  return F(b) - F(a);
}

/// Integral of |x|^gamma over the disk B(c, r) in the plane (gamma > -2), by
/// integrating s^{gamma+1} times the angular measure of the circle |x| = s
/// inside the disk.
inline double power_integral_2d(const Point& c, double r, double gamma) {
  const double d = c.norm();
  const double a = std::abs(r - d);
  const double b = r + d;
  double total = 0.0;
  if (d <= r) total += 2.0 * M_PI * std::pow(a, gamma + 2.0) / (gamma + 2.0);
  const double width = b - a;
  if (width <= 0.0) return total;
  auto angle = [&](double s) {
    if (s <= 0.0) return d <= r ? 2.0 * M_PI : 0.0;
    const double arg = std::clamp((s * s + d * d - r * r) / (2.0 * s * d), -1.0, 1.0);
    return 2.0 * std::acos(arg);
  };
  // s = a + width (1 - cos u)/2 removes the square-root endpoint behaviour.
  constexpr int kPanels = 2048;
  const double du = M_PI / kPanels;
  double acc = 0.0;
  for (int i = 0; i <= kPanels; ++i) {
    const double u = i * du;
    const double s = a + 0.5 * width * (1.0 - std::cos(u));
    const double jac = 0.5 * width * std::sin(u);
    const double coef = (i == 0 || i == kPanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    if (s > 0.0) acc += coef * std::pow(s, gamma + 1.0) * angle(s) * jac;
  }
  return total + acc * du / 3.0;
}

}  // namespace detail

/// Continuum w(B) on all of R^n for constant and power weights, ignoring the
/// box and the origin regularization. Tabulated weights fall back to the grid.
inline double analytic_measure(const Weight& w, const Ball& ball) {
  const int n = w.grid().dim();
  switch (w.kind()) {
    case Weight::Kind::Constant: return w.parameter() * ball.volume(n);
    case Weight::Kind::Power: {
      const double gamma = w.parameter();
      if (!(gamma > -n)) throw Error("analytic_measure: |x|^gamma is not locally integrable");
      if (n == 1)
        return detail::power_integral_1d(ball.center[0] - ball.radius, ball.center[0] + ball.radius,
                                         gamma);
      return detail::power_integral_2d(ball.center, ball.radius, gamma);
    }
    default: return measure(w, ball);
  }
}

/// max over the family of (avg_B w) (avg_B w^{1-p'})^{p-1}.
inline double ap_characteristic(const Weight& w, double p, const BallFamily& family) {
  if (!(p > 1.0)) throw Error("ap_characteristic: p must exceed 1");
  if (family.size() == 0) throw Error("ap_characteristic: empty family");
  const double e = -1.0 / (p - 1.0);
  double best = 0.0;
  const BallFamily fam = family.on(w.grid());
  for (const Ball& ball : fam.balls()) {
    const BallNodes nodes = ball_nodes(w.grid(), ball);
    double sw = 0.0, sd = 0.0;
    for (std::size_t i : nodes.indices) {
      sw += w[i];
      sd += std::pow(w[i], e);
    }
    const double cnt = double(nodes.count());
    const double val = (sw / cnt) * std::pow(sd / cnt, p - 1.0);
    if (!std::isfinite(val))
      throw Error("ap_characteristic: overflow; reduce |gamma| or the exponent p");
    best = std::max(best, val);
  }
  return best;
}

/// max over nodes covered by the family of (max average over covering balls) / w(node).
inline double a1_characteristic(const Weight& w, const BallFamily& family) {
  const Grid& g = w.grid();
  std::vector<double> maximal(g.size(), 0.0);
  const BallFamily fam = family.on(g);
  for (const Ball& ball : fam.balls()) {
    const BallNodes nodes = ball_nodes(g, ball);
    const double avg = measure(w, nodes) / nodes.measure();
    for (std::size_t i : nodes.indices) maximal[i] = std::max(maximal[i], avg);
  }
  double best = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (maximal[i] > 0.0) best = std::max(best, maximal[i] / w[i]);
  return best;
}

struct DoublingReport {
  double value = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  ///< balls whose double leaves the box
};

inline bool fits_in_box(const Grid& g, const Ball& b) {
  for (int k = 0; k < g.dim(); ++k)
    if (std::abs(b.center[k]) + b.radius > g.half_width() * (1.0 + kTieTolerance)) return false;
  return true;
}

/// max over the family of w(lambda B) / w(B), skipping balls whose dilate leaves the box.
inline DoublingReport dilation_ratio(const Weight& w, const BallFamily& family, double lambda) {
  DoublingReport rep;
  const BallFamily fam = family.on(w.grid());
  for (const Ball& ball : fam.balls()) {
    const Ball big = ball.scaled(lambda);
    if (!fits_in_box(w.grid(), big)) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    rep.value = std::max(rep.value, measure(w, big) / measure(w, ball));
  }
  return rep;
}

inline DoublingReport doubling_constant(const Weight& w, const BallFamily& family) {
  return dilation_ratio(w, family, 2.0);
}

struct ReverseDoublingFit {
  double delta = 0.0;
  double constant = 0.0;
  std::size_t fit_pairs = 0;
  std::size_t holdout_pairs = 0;
  /// max over held-out pairs of (w(S)/w(B)) / (C (|S|/|B|)^delta).
  double holdout_worst = 0.0;
  bool holds = false;
};

namespace detail {

struct NestedPair {
  double measure_ratio;   ///< w(S)/w(B)
  double lebesgue_ratio;  ///< |S|_h / |B|_h
};

inline std::vector<NestedPair> nested_pairs(const Weight& w, const BallFamily& family) {
  const Grid& g = w.grid();
  const BallFamily fam = family.on(g);
  std::vector<NestedPair> out;
  for (const Point& c : fam.centers()) {
    std::vector<BallNodes> nodes;
    std::vector<double> mass;
    for (double r : fam.radii()) {
      nodes.push_back(ball_nodes(g, Ball{c, r}));
      mass.push_back(measure(w, nodes.back()));
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i + 1; j < nodes.size(); ++j)
        out.push_back({mass[i] / mass[j], nodes[i].measure() / nodes[j].measure()});
  }
  return out;
}

}  // namespace detail

/// Fits w(S)/w(B) <= C (|S|/|B|)^delta over concentric pairs S in B of the
/// family: delta is the smallest log-slope among pairs with |S| <= |B|/4, C the
/// smallest constant valid on every pair. Held-out pairs come from the
/// twofold-enlarged family.
inline ReverseDoublingFit check_reverse_doubling(const Weight& w, double p,
                                                 const BallFamily& family) {
  (void)p;
  ReverseDoublingFit fit;
  const auto pairs = detail::nested_pairs(w, family);
  double delta = std::numeric_limits<double>::infinity();
  for (const auto& pr : pairs) {
    if (pr.lebesgue_ratio > 0.25) continue;
    delta = std::min(delta, std::log(pr.measure_ratio) / std::log(pr.lebesgue_ratio));
    ++fit.fit_pairs;
  }
  if (fit.fit_pairs == 0) throw Error("check_reverse_doubling: no nested pairs with ratio <= 1/4");
  fit.delta = delta;
  double c = 0.0;
  for (const auto& pr : pairs) c = std::max(c, pr.measure_ratio * std::pow(pr.lebesgue_ratio, -delta));
  fit.constant = c;
  for (const auto& pr : detail::nested_pairs(w, family.enlarged())) {
    ++fit.holdout_pairs;
    fit.holdout_worst = std::max(
        fit.holdout_worst, pr.measure_ratio / (c * std::pow(pr.lebesgue_ratio, delta)));
  }
  fit.holds = fit.delta > 0.0 && fit.holdout_worst <= 1.0 + 1e-2;
  return fit;
}

struct WeightDiagnostics {
  std::string kind;
  double parameter = 0.0;
  double p = 0.0;
  double ap_estimate = 0.0;
  double doubling = 0.0;
  double delta = 0.0;
  double delta_constant = 0.0;
  std::string family_id;
};

inline WeightDiagnostics diagnose(const Weight& w, double p, const BallFamily& family) {
  WeightDiagnostics d;
  d.kind = w.kind_name();
  d.parameter = w.parameter();
  d.p = p;
  d.ap_estimate = ap_characteristic(w, p, family);
  d.doubling = doubling_constant(w, family).value;
  const auto fit = check_reverse_doubling(w, p, family);
  d.delta = fit.delta;
  d.delta_constant = fit.constant;
  d.family_id = family.id();
  return d;
}

/// Relative growth of a characteristic when the discretized sup is refined:
/// the grid spacing is halved and the ball family enlarged twofold.
template <class Characteristic>
double refinement_growth(const Weight& w, const BallFamily& family, Characteristic&& chr) {
  const double base = chr(w, family);
  const Weight fine = w.on(w.grid().refined());
  const double grown = chr(fine, family.on(fine.grid()).enlarged());
  return grown / base - 1.0;
}

/// Membership rule used by the tests: growth below 25%.
inline bool accepted_by_growth(double growth) { return growth < 0.25; }

}  // namespace sqfn
