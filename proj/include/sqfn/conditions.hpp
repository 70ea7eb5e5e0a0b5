#pragma once

// Hardy-type averaging operators on (0, inf) with their boundedness constants,
// and evaluators of the integral conditions on pairs (phi1, phi2) returning the
// minimal admissible constant over a point family.

#include "sqfn/grid.hpp"
#include "sqfn/norms.hpp"
#include "sqfn/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace sqfn {

/// Samples of a function of r on a geometric grid.
class RadialProfile {
 public:
  template <class Fn>
  static RadialProfile sample(double r_min, double r_max, int per_octave, Fn&& fn) {
    RadialProfile p(r_min, r_max, per_octave);
    for (double r : p.r_) p.v_.push_back(double(fn(r)));
    p.certify();
    return p;
  }

  std::size_t size() const { return r_.size(); }
  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& values() const { return v_; }
  double r_min() const { return r_.front(); }
  double r_max() const { return r_.back(); }
  int per_octave() const { return per_octave_; }
  bool nonincreasing() const { return violation_ == 0.0; }
  /// Largest increase between consecutive samples.
  double violation() const { return violation_; }

  /// Linear interpolation in ln r; clamped to the end values.
  double at(double r) const {
    if (r <= r_.front()) return v_.front();
    if (r >= r_.back()) return v_.back();
    const double u = std::log(r / r_.front()) / std::log(ratio_);
    const std::size_t j = std::min(size() - 2, std::size_t(u));
    const double a = (std::log(r) - std::log(r_[j])) / (std::log(r_[j + 1]) - std::log(r_[j]));
    return (1.0 - a) * v_[j] + a * v_[j + 1];
  }

 private:
  RadialProfile(double r_min, double r_max, int per_octave) : per_octave_(per_octave) {
    if (!(r_min > 0.0) || !(r_max > r_min)) throw Error("RadialProfile: need 0 < r_min < r_max");
    if (per_octave < 1) throw Error("RadialProfile: per_octave must be positive");
    ratio_ = std::exp2(1.0 / per_octave);
    for (int i = 0;; ++i) {
      const double r = r_min * std::exp2(double(i) / per_octave);
      if (r >= r_max * (1.0 - kTieTolerance)) {
        r_.push_back(r_max);
        break;
      }
      r_.push_back(r);
    }
  }

  void certify() {
    for (double v : v_)
      if (!std::isfinite(v)) throw Error("RadialProfile: non-finite sample");
    violation_ = 0.0;
    for (std::size_t i = 0; i + 1 < v_.size(); ++i) violation_ = std::max(violation_, v_[i + 1] - v_[i]);
  }

  int per_octave_;
  double ratio_ = 2.0;
  std::vector<double> r_;
  std::vector<double> v_;
  double violation_ = 0.0;
};

/// Borel measure on (0, inf): Lebesgue, density rho(r) dr, or a finite sum of atoms.
class Measure1D {
 public:
  enum class Kind { Lebesgue, Density, Atomic };

  static Measure1D lebesgue() { return Measure1D(Kind::Lebesgue); }
  static Measure1D density(std::function<double(double)> rho, std::string name = "density") {
    Measure1D m(Kind::Density);
    m.rho_ = std::move(rho);
    m.name_ = std::move(name);
    return m;
  }
  static Measure1D atomic(std::vector<double> points, std::vector<double> masses) {
    if (points.size() != masses.size()) throw Error("Measure1D: atoms and masses differ in length");
    for (std::size_t i = 0; i < points.size(); ++i)
      if (!(points[i] > 0.0) || !(masses[i] >= 0.0)) throw Error("Measure1D: invalid atom");
    Measure1D m(Kind::Atomic);
    m.points_ = std::move(points);
    m.masses_ = std::move(masses);
    return m;
  }

  Kind kind() const { return kind_; }
  std::string describe() const {
    switch (kind_) {
      case Kind::Lebesgue: return "lebesgue";
      case Kind::Density: return name_;
      default: return "atomic";
    }
  }
  double density_at(double r) const { return kind_ == Kind::Lebesgue ? 1.0 : rho_(r); }
  const std::vector<double>& atoms() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }

  /// mu((0, t]) (for the absolutely continuous kinds, integrated from a small floor).
  double cumulative(double t, double floor = 0.0) const {
    switch (kind_) {
      case Kind::Lebesgue: return std::max(0.0, t - floor);
      case Kind::Atomic: {
        double s = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i)
          if (points_[i] > floor && points_[i] <= t) s += masses_[i];
        return s;
      }
      default: {
        constexpr int kPanels = 4096;
        const double lo = std::max(floor, 1e-300);
        if (t <= lo) return 0.0;
        const double du = std::log(t / lo) / kPanels;
        double s = 0.0;
        for (int i = 0; i <= kPanels; ++i) {
          const double r = lo * std::exp(i * du);
          s += ((i == 0 || i == kPanels) ? 0.5 : 1.0) * rho_(r) * r;
        }
        return s * du;
      }
    }
  }

 private:
  explicit Measure1D(Kind k) : kind_(k) {}
  Kind kind_;
  std::function<double(double)> rho_;
  std::vector<double> points_, masses_;
  std::string name_;
};

namespace detail {

/// (1/t) int_{(r_min, t]} factor(r) g(r) dmu(r); absolutely continuous measures
/// use the trapezoid rule on the profile nodes (plus a partial last segment).
template <class Factor>
double hardy_quadrature(const RadialProfile& g, const Measure1D& mu, double t, Factor&& factor) {
  if (!(t > 0.0)) throw Error("hardy: t must be positive");
  const auto& r = g.r();
  const auto& v = g.values();
  double acc = 0.0;
  if (mu.kind() == Measure1D::Kind::Atomic) {
    for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
      const double a = mu.atoms()[i];
      if (a > r.front() && a <= t) acc += factor(a) * g.at(a) * mu.masses()[i];
    }
    return acc / t;
  }
  auto integrand = [&](double x, double gx) { return factor(x) * gx * mu.density_at(x); };
  for (std::size_t j = 0; j + 1 < r.size() && r[j] < t; ++j) {
    const double lo = r[j];
    const double hi = std::min(r[j + 1], t);
    const double ghi = hi == r[j + 1] ? v[j + 1] : g.at(hi);
    acc += 0.5 * (hi - lo) * (integrand(lo, v[j]) + integrand(hi, ghi));
  }
  return acc / t;
}

}  // namespace detail

/// (Hg)(t) = (1/t) int_{(r_min, t]} g dmu.
inline double hardy(const RadialProfile& g, const Measure1D& mu, double t) {
  return detail::hardy_quadrature(g, mu, t, [](double) { return 1.0; });
}

/// (H_1 g)(t) = (1/t) int_{(r_min, t]} ln^k(e + t/r) g dmu; k = 0 is hardy.
inline double hardy_log(const RadialProfile& g, const Measure1D& mu, double t, int korder) {
  if (korder < 0) throw Error("hardy_log: order must be nonnegative");
  if (korder == 0) return hardy(g, mu, t);
  return detail::hardy_quadrature(g, mu, t, [&](double r) {
    return std::pow(std::log(M_E + t / r), korder);
  });
}

struct HardyBoundReport {
  double lhs_sup = 0.0;  ///< max_t omega(t) (H_k g)(t)
  double rhs_sup = 0.0;  ///< max_t v(t) g(t)
  double constant = 0.0;  ///< A (k = 0) or A_1
  double ratio = 0.0;    ///< lhs_sup / (constant rhs_sup)
  bool monotone = true;
  double violation = 0.0;
  bool claim_checked = false;
  int korder = 0;
};

/// Both sides of ess sup omega H_k g <= c ess sup v g on the nodes of g, with
///   A = max_t (omega(t)/t) int ln^k(e + t/r) dmu(r) / V(r),
/// V(r) the running maximum of v over nodes s <= r.
inline HardyBoundReport hardy_bound_check(const std::function<double(double)>& omega,
                                          const std::function<double(double)>& v,
                                          const RadialProfile& g, const Measure1D& mu, int korder) {
  HardyBoundReport rep;
  rep.korder = korder;
  rep.monotone = g.nonincreasing();
  rep.violation = g.violation();
  for (double x : g.values())
    if (x < 0.0) throw Error("hardy_bound_check: g must be nonnegative");
  if (!rep.monotone) return rep;
  const auto& r = g.r();
  std::vector<double> vmax(r.size());
  double run = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    run = std::max(run, v(r[i]));
    vmax[i] = run;
  }
  const RadialProfile inv = RadialProfile::sample(g.r_min(), g.r_max(), g.per_octave(), [&](double x) {
    const std::size_t i = std::size_t(std::lower_bound(r.begin(), r.end(), x * (1.0 - kTieTolerance)) - r.begin());
    return 1.0 / vmax[std::min(i, r.size() - 1)];
  });
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double t = r[i];
    rep.lhs_sup = std::max(rep.lhs_sup, omega(t) * hardy_log(g, mu, t, korder));
    rep.rhs_sup = std::max(rep.rhs_sup, v(t) * g.values()[i]);
    rep.constant = std::max(rep.constant, omega(t) * hardy_log(inv, mu, t, korder));
  }
  rep.ratio = rep.rhs_sup > 0.0 && rep.constant > 0.0 ? rep.lhs_sup / (rep.constant * rep.rhs_sup) : 0.0;
  rep.claim_checked = true;
  return rep;
}

// ---------------------------------------------------------------------------
// Pair conditions.

enum class ConditionKind { Zygmund, Supremal, Weighted, WeightedLog };

inline std::string condition_name(ConditionKind k) {
  switch (k) {
    case ConditionKind::Zygmund: return "1.1";
    case ConditionKind::Supremal: return "1.2";
    case ConditionKind::Weighted: return "1.3";
    default: return "1.4";
  }
}

/// How "ess" over s in (t, T) is read.
enum class EssMode { Inf, Sup };

struct ConditionOptions {
  double t_max = 1e6;       ///< truncation horizon T
  int per_octave = 16;      ///< density of the t and s grids
  EssMode ess = EssMode::Inf;
  double holds_drift = 0.05;
  double fails_growth = 2.0;
};

struct ConditionReport {
  ConditionKind kind = ConditionKind::Zygmund;
  int korder = 0;
  double p = 1.0;
  std::string phi1, phi2, weight;
  double c_min = 0.0;       ///< with horizon T
  double c_half = 0.0;      ///< with horizon T/2
  double growth = 0.0;      ///< c_min / c_half
  double tail_drift = 0.0;  ///< max(0, growth - 1)
  std::string verdict;      ///< holds, fails or inconclusive
  Ball argmax;
  std::size_t points = 0;
  double t_max = 0.0;
  int per_octave = 0;
  std::string ess;
};

namespace detail {

/// int_r^T integrand(t) dt/t on t = r 2^{i/per_octave} (T appended), trapezoid in ln t.
inline double condition_lhs(const PhiFunction& phi1, const Weight* w, double p, ConditionKind kind,
                            int korder, const Point& x, double r, double T, int per_octave,
                            EssMode ess) {
  if (!(T > r)) return 0.0;
  std::vector<double> t;
  for (int i = 0;; ++i) {
    const double v = r * std::exp2(double(i) / per_octave);
    if (v >= T * (1.0 - kTieTolerance)) break;
    t.push_back(v);
  }
  t.push_back(T);
  const int n = w ? w->grid().dim() : 1;
  const std::size_t N = t.size();
  std::vector<double> inner(N), denom(N, 1.0);
  for (std::size_t i = 0; i < N; ++i) {
    const double f1 = phi1(x, t[i]);
    switch (kind) {
      case ConditionKind::Zygmund: inner[i] = f1; break;
      case ConditionKind::Supremal:
        inner[i] = f1 * std::pow(t[i], n / p);
        denom[i] = std::pow(t[i], n / p);
        break;
      default: {
        const double wb = std::pow(analytic_measure(*w, Ball{x, t[i]}), 1.0 / p);
        inner[i] = f1 * wb;
        denom[i] = wb;
      }
    }
  }
  // Suffix extremum over s in [t_i, T].
  if (kind != ConditionKind::Zygmund) {
    for (std::size_t i = N - 1; i-- > 0;)
      inner[i] = ess == EssMode::Inf ? std::min(inner[i], inner[i + 1]) : std::max(inner[i], inner[i + 1]);
  }
  std::vector<double> f(N);
  for (std::size_t i = 0; i < N; ++i) {
    f[i] = inner[i] / denom[i];
    if (kind == ConditionKind::WeightedLog && korder > 0)
      f[i] *= std::pow(std::log(M_E + t[i] / r), korder);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < N; ++i) acc += 0.5 * std::log(t[i + 1] / t[i]) * (f[i] + f[i + 1]);
  return acc;
}

}  // namespace detail

/// Points (x, r): every center with radii r_min 2^{i/per_octave} up to r_max.
inline std::vector<Ball> condition_points(const std::vector<Point>& centers, double r_min, double r_max,
                                          int per_octave = 4) {
  std::vector<Ball> out;
  for (const Point& c : centers)
    for (int i = 0;; ++i) {
      const double r = r_min * std::exp2(double(i) / per_octave);
      if (r > r_max * (1.0 + kTieTolerance)) break;
      out.push_back(Ball{c, r});
    }
  return out;
}

/// Minimal C with LHS(x, r) <= C phi2(x, r) over the points, at horizons T and T/2.
/// Weighted kinds use the continuum ball measure of w so that balls may exceed the box.
inline ConditionReport condition_eval(const PhiFunction& phi1, const PhiFunction& phi2, const Weight* w,
                                      double p, ConditionKind kind, int korder,
                                      const std::vector<Ball>& points, const ConditionOptions& opt = {}) {
  if (!(p >= 1.0)) throw Error("condition_eval: p must be >= 1");
  if ((kind == ConditionKind::Weighted || kind == ConditionKind::WeightedLog) && !w)
    throw Error("condition_eval: weighted conditions need a weight");
  if (kind == ConditionKind::WeightedLog && korder < 0) throw Error("condition_eval: bad log order");
  if (points.empty()) throw Error("condition_eval: empty point family");
  ConditionReport rep;
  rep.kind = kind;
  rep.korder = korder;
  rep.p = p;
  rep.phi1 = phi1.describe();
  rep.phi2 = phi2.describe();
  rep.weight = w ? w->describe() : "none";
  rep.points = points.size();
  rep.t_max = opt.t_max;
  rep.per_octave = opt.per_octave;
  rep.ess = opt.ess == EssMode::Inf ? "inf" : "sup";
  rep.argmax = points.front();
  for (const Ball& b : points) {
    const double f2 = phi2(b.center, b.radius);
    if (!(f2 > 0.0)) throw Error("condition_eval: phi2 vanishes");
    const double full = detail::condition_lhs(phi1, w, p, kind, korder, b.center, b.radius, opt.t_max,
                                              opt.per_octave, opt.ess) / f2;
    const double half = detail::condition_lhs(phi1, w, p, kind, korder, b.center, b.radius,
                                              0.5 * opt.t_max, opt.per_octave, opt.ess) / f2;
    if (full > rep.c_min) {
      rep.c_min = full;
      rep.argmax = b;
    }
    rep.c_half = std::max(rep.c_half, half);
  }
  rep.growth = rep.c_half > 0.0 ? rep.c_min / rep.c_half : std::numeric_limits<double>::infinity();
  rep.tail_drift = std::max(0.0, rep.growth - 1.0);
  if (!std::isfinite(rep.c_min)) rep.verdict = "fails";
  else if (rep.tail_drift < opt.holds_drift) rep.verdict = "holds";
  else if (rep.growth >= opt.fails_growth * (1.0 - kTieTolerance)) rep.verdict = "fails";
  else rep.verdict = "inconclusive";
  return rep;
}

struct TailIntegral {
  double value = 0.0;
  bool converged = false;
  double horizon = 0.0;  ///< in u = ln tau
  int doublings = 0;
};

/// int_1^inf ln^k(e + tau) tau^{-a} dtau/tau with a = n delta (1 - kappa)/p,
/// Simpson in u = ln tau, the horizon doubled until the relative change is below tol.
inline TailIntegral reverse_doubling_tail(double kappa, double p, int n, double delta, int korder,
                                    double du = 1.0 / 32, double tol = 1e-6, double max_horizon = 65536.0) {
  if (!(kappa < 1.0)) throw Error("reverse_doubling_tail: kappa must be below 1");
  if (!(delta > 0.0) || !(p >= 1.0) || n < 1 || korder < 0)
    throw Error("reverse_doubling_tail: invalid parameters");
  const double a = n * delta * (1.0 - kappa) / p;
  auto f = [&](double u) {
    const double lg = korder == 0 ? 1.0 : std::pow(u + std::log1p(std::exp(1.0 - u)), korder);
    return lg * std::exp(-a * u);
  };
  // Simpson on [lo, hi] with an even number of panels of width about du.
  auto simpson = [&](double lo, double hi) {
    int panels = std::max(2, int(std::ceil((hi - lo) / du)));
    if (panels % 2) ++panels;
    const double hstep = (hi - lo) / panels;
    double s = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * hstep);
    return s * hstep / 3.0;
  };
  TailIntegral out;
  double horizon = 8.0;
  double value = simpson(0.0, horizon);
  while (horizon < max_horizon) {
    const double next = value + simpson(horizon, 2.0 * horizon);
    horizon *= 2.0;
    ++out.doublings;
    const bool done = std::abs(next - value) <= tol * std::abs(next);
    value = next;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.value = value;
  out.horizon = horizon;
  return out;
}

}  // namespace sqfn
