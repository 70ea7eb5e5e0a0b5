#pragma once

// Weighted Lebesgue and weak Lebesgue norms on balls, BMO norms, generalized
// weighted Morrey norms, and the BMO probes (logarithmic pair estimate,
// level-set decay, L^p oscillation equivalence). All sups over (x, r) are maxima
// over a BallFamily.

#include "sqfn/ball_family.hpp"
#include "sqfn/grid.hpp"
#include "sqfn/weights.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace sqfn {

enum class MeasureMode { Grid, Analytic };

inline double ball_measure(const Weight& w, const Ball& b, MeasureMode mode) {
  return mode == MeasureMode::Grid ? measure(w, b) : analytic_measure(w, b);
}

/// phi(x, r) evaluators.
class PhiFunction {
 public:
  enum class Kind { Power, WeightedMorrey, TwoWeight, Custom };

  /// r^{(lambda - n)/p}.
  static PhiFunction power(double lambda, double p, int n) {
    PhiFunction f(Kind::Power);
    f.param_ = lambda;
    f.p_ = p;
    f.exponent_ = (lambda - n) / p;
    return f;
  }
  /// r^e for an explicit exponent.
  static PhiFunction radial_power(double exponent) {
    PhiFunction f(Kind::Power);
    f.exponent_ = exponent;
    f.param_ = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  /// w(B(x, r))^{(kappa - 1)/p}.
  static PhiFunction weighted_morrey(double kappa, double p, const Weight& w,
                                     MeasureMode mode = MeasureMode::Grid) {
    PhiFunction f(Kind::WeightedMorrey);
    f.param_ = kappa;
    f.p_ = p;
    f.w_ = std::make_shared<const Weight>(w);
    f.mode_ = mode;
    return f;
  }
  /// v(B(x, r))^{kappa/p} w(B(x, r))^{-1/p}.
  static PhiFunction two_weight(double kappa, double p, const Weight& v, const Weight& w,
                                MeasureMode mode = MeasureMode::Grid) {
    PhiFunction f(Kind::TwoWeight);
    f.param_ = kappa;
    f.p_ = p;
    f.v_ = std::make_shared<const Weight>(v);
    f.w_ = std::make_shared<const Weight>(w);
    f.mode_ = mode;
    return f;
  }
  static PhiFunction custom(std::string name, std::function<double(const Point&, double)> fn) {
    PhiFunction f(Kind::Custom);
    f.name_ = std::move(name);
    f.fn_ = std::move(fn);
    return f;
  }

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }
  double p() const { return p_; }
  double exponent() const { return exponent_; }
  const Weight* weight() const { return w_.get(); }
  MeasureMode mode() const { return mode_; }

  /// Same phi with weighted measures taken in another mode.
  PhiFunction with_mode(MeasureMode mode) const {
    PhiFunction f = *this;
    f.mode_ = mode;
    return f;
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::Power: os << "r^" << exponent_; break;
      case Kind::WeightedMorrey: os << "w(B)^((" << param_ << "-1)/" << p_ << ")"; break;
      case Kind::TwoWeight: os << "v(B)^(" << param_ << "/" << p_ << ")w(B)^(-1/" << p_ << ")"; break;
      default: os << name_;
    }
    return os.str();
  }

  std::string kind_name() const {
    switch (kind_) {
      case Kind::Power: return "power";
      case Kind::WeightedMorrey: return "weighted_morrey";
      case Kind::TwoWeight: return "two_weight";
      default: return "custom";
    }
  }

  double operator()(const Point& x, double r) const {
    double v = 0.0;
    switch (kind_) {
      case Kind::Power: v = std::pow(r, exponent_); break;
      case Kind::WeightedMorrey:
        v = std::pow(ball_measure(*w_, Ball{x, r}, mode_), (param_ - 1.0) / p_);
        break;
      case Kind::TwoWeight:
        v = std::pow(ball_measure(*v_, Ball{x, r}, mode_), param_ / p_) *
            std::pow(ball_measure(*w_, Ball{x, r}, mode_), -1.0 / p_);
        break;
      default: v = fn_(x, r);
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw Error("PhiFunction: non-positive value " + describe());
    return v;
  }

 private:
  explicit PhiFunction(Kind k) : kind_(k) {}

  Kind kind_;
  double param_ = 0.0;
  double p_ = 1.0;
  double exponent_ = 0.0;
  std::shared_ptr<const Weight> w_, v_;
  MeasureMode mode_ = MeasureMode::Grid;
  std::string name_;
  std::function<double(const Point&, double)> fn_;
};

// ---------------------------------------------------------------------------
// Local norms.

template <std::floating_point Scalar>
double lp_w_ball(const GridFunction<Scalar>& f, const Weight& w, double p, const Ball& ball) {
  if (!(p >= 1.0)) throw Error("lp_w_ball: p must be >= 1");
  if (f.grid() != w.grid()) throw Error("lp_w_ball: field and weight use different grids");
  const BallNodes nodes = ball_nodes(f.grid(), ball);
  double s = 0.0;
  for (std::size_t i : nodes.indices) s += std::pow(std::abs(double(f[i])), p) * w[i];
  return std::pow(s * nodes.node_weight, 1.0 / p);
}

/// sup_t t w({|f| > t} cap B)^{1/p}, exactly: max_i v_i W_i^{1/p} over the
/// distinct values v_i of |f| on the ball, W_i the weight of {|f| >= v_i}.
template <std::floating_point Scalar>
double weak_lp_w_ball(const GridFunction<Scalar>& f, const Weight& w, double p, const Ball& ball) {
  if (!(p >= 1.0)) throw Error("weak_lp_w_ball: p must be >= 1");
  if (f.grid() != w.grid()) throw Error("weak_lp_w_ball: field and weight use different grids");
  const BallNodes nodes = ball_nodes(f.grid(), ball);
  std::vector<std::pair<double, double>> vals;
  vals.reserve(nodes.count());
  for (std::size_t i : nodes.indices) vals.emplace_back(std::abs(double(f[i])), w[i]);
  std::sort(vals.begin(), vals.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  double best = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < vals.size();) {
    const double v = vals[i].first;
    while (i < vals.size() && vals[i].first == v) mass += vals[i++].second;
    if (v > 0.0) best = std::max(best, v * std::pow(mass * nodes.node_weight, 1.0 / p));
  }
  return best;
}

// ---------------------------------------------------------------------------
// BMO.

struct NormValue {
  double value = 0.0;
  Ball argmax;
  std::string family_id;
};

namespace detail {

/// (1/w(B)) sum |b - b_{B,w}| w and the weighted mean, over the ball nodes; a
/// null weight means w = 1 with the identical operation order.
template <std::floating_point Scalar>
std::pair<double, double> weighted_oscillation(const GridFunction<Scalar>& b, const BallNodes& nodes,
                                               const Weight* w) {
  double sw = 0.0, sb = 0.0;
  for (std::size_t i : nodes.indices) {
    const double wi = w ? (*w)[i] : 1.0;
    sw += wi;
    sb += double(b[i]) * wi;
  }
  const double mean = sb / sw;
  double osc = 0.0;
  for (std::size_t i : nodes.indices) {
    const double wi = w ? (*w)[i] : 1.0;
    osc += std::abs(double(b[i]) - mean) * wi;
  }
  return {osc / sw, mean};
}

template <std::floating_point Scalar>
NormValue bmo_scan(const GridFunction<Scalar>& b, const Weight* w, const BallFamily& family) {
  NormValue out;
  out.family_id = family.id();
  const BallFamily fam = family.on(b.grid());
  out.argmax = fam.balls().front();
  for (const Ball& ball : fam.balls()) {
    const double v = weighted_oscillation(b, ball_nodes(b.grid(), ball), w).first;
    if (v > out.value) {
      out.value = v;
      out.argmax = ball;
    }
  }
  return out;
}

}  // namespace detail

/// Ball mean (1/|B|_h) h^n sum b.
template <std::floating_point Scalar>
double ball_mean(const GridFunction<Scalar>& b, const Ball& ball) {
  const BallNodes nodes = ball_nodes(b.grid(), ball);
  double s = 0.0;
  for (std::size_t i : nodes.indices) s += double(b[i]);
  return s / double(nodes.count());
}

template <std::floating_point Scalar>
double weighted_ball_mean(const GridFunction<Scalar>& b, const Weight& w, const Ball& ball) {
  return detail::weighted_oscillation(b, ball_nodes(b.grid(), ball), &w).second;
}

template <std::floating_point Scalar>
NormValue bmo_norm(const GridFunction<Scalar>& b, const BallFamily& family) {
  return detail::bmo_scan(b, nullptr, family);
}

template <std::floating_point Scalar>
NormValue bmo_norm_weighted(const GridFunction<Scalar>& b, const Weight& w, const BallFamily& family) {
  if (b.grid() != w.grid()) throw Error("bmo_norm_weighted: field and weight use different grids");
  return detail::bmo_scan(b, &w, family);
}

// ---------------------------------------------------------------------------
// Morrey norms.

/// max over the family of phi(x,r)^{-1} w(B)^{-1/p} ||f||_{L^p_w(B)} (weak: WL^p_w).
/// For weighted-Morrey phi built on the same weight the ball factor is computed
/// as w(B)^{-kappa/p}.
template <std::floating_point Scalar>
NormValue morrey_norm(const GridFunction<Scalar>& f, const Weight& w, double p, const PhiFunction& phi,
                      const BallFamily& family, bool weak = false) {
  NormValue out;
  out.family_id = family.id();
  const BallFamily fam = family.on(f.grid());
  out.argmax = fam.balls().front();
  const bool same_weight = phi.kind() == PhiFunction::Kind::WeightedMorrey && phi.weight() &&
                           phi.weight()->kind() == w.kind() &&
                           phi.weight()->parameter() == w.parameter() &&
                           phi.weight()->grid() == w.grid() && phi.p() == p &&
                           phi.mode() == MeasureMode::Grid &&
                           (w.kind() != Weight::Kind::Tabulated ||
                            (phi.weight()->nodal().values() == w.nodal().values()).all());
  for (const Ball& ball : fam.balls()) {
    const double local = weak ? weak_lp_w_ball(f, w, p, ball) : lp_w_ball(f, w, p, ball);
    const double wb = measure(w, ball);
    const double factor = same_weight ? std::pow(wb, -phi.parameter() / p)
                                      : 1.0 / (phi(ball.center, ball.radius) * std::pow(wb, 1.0 / p));
    const double v = factor * local;
    if (v > out.value) {
      out.value = v;
      out.argmax = ball;
    }
  }
  return out;
}

template <std::floating_point Scalar>
NormValue morrey_norm(const VecGridFunction<Scalar>& vf, const Weight& w, double p,
                      const PhiFunction& phi, const BallFamily& family, bool weak = false) {
  return morrey_norm(l2_pointwise(vf), w, p, phi, family, weak);
}

// ---------------------------------------------------------------------------
// BMO probes.

struct LogPairReport {
  double bmo = 0.0;
  double fitted_constant = 0.0;       ///< part (i)
  double fitted_constant_dual = 0.0;  ///< part (ii); zero when p = 1
  std::size_t pairs = 0;
  int korder = 1;
  double p = 1.0;
  std::string family_id;
};

/// Concentric pairs (B(x, r1), B(x, r2)) over the family:
///   (i)  ((1/w(B1)) int_{B1} |b - b_{B2,w}|^{kp} w)^{1/p}
///   (ii) the same with exponent k p' and the weight w^{1-p'}
/// each divided by (1 + |ln r1/r2|)^k ||b||_*^k; the reported constants are the maxima.
template <std::floating_point Scalar>
LogPairReport bmo_log_pair_check(const GridFunction<Scalar>& b, const Weight& w,
                                 const BallFamily& family, int korder, double p) {
  if (korder < 1) throw Error("bmo_log_pair_check: order must be >= 1");
  if (!(p >= 1.0)) throw Error("bmo_log_pair_check: p must be >= 1");
  LogPairReport rep;
  rep.korder = korder;
  rep.p = p;
  rep.family_id = family.id();
  rep.bmo = bmo_norm(b, family).value;
  const Grid& g = b.grid();
  const BallFamily fam = family.on(g);
  const bool dual = p > 1.0;
  const Weight wd = dual ? w.dual(p) : w;
  const double pd = dual ? p / (p - 1.0) : 1.0;
  for (const Point& c : fam.centers()) {
    for (double r2 : fam.radii()) {
      const double mean2 = weighted_ball_mean(b, w, Ball{c, r2});
      for (double r1 : fam.radii()) {
        const BallNodes n1 = ball_nodes(g, Ball{c, r1});
        double si = 0.0, wi = 0.0, sd = 0.0, wdi = 0.0;
        for (std::size_t i : n1.indices) {
          const double dev = std::abs(double(b[i]) - mean2);
          si += std::pow(dev, korder * p) * w[i];
          wi += w[i];
          if (dual) {
            sd += std::pow(dev, korder * pd) * wd[i];
            wdi += wd[i];
          }
        }
        const double base = std::pow((1.0 + std::abs(std::log(r1 / r2))) * rep.bmo, korder);
        ++rep.pairs;
        if (base == 0.0) continue;
        rep.fitted_constant = std::max(rep.fitted_constant, std::pow(si / wi, 1.0 / p) / base);
        if (dual)
          rep.fitted_constant_dual =
              std::max(rep.fitted_constant_dual, std::pow(sd / wdi, 1.0 / pd) / base);
      }
    }
  }
  return rep;
}

struct JohnNirenbergReport {
  std::vector<double> beta;          ///< thresholds (absolute)
  std::vector<double> distribution;  ///< w({|b - b_B| > beta} cap B) / w(B)
  double bmo = 0.0;                  ///< normalizing oscillation ||b||_*
  double C1 = 0.0;
  double C2 = 0.0;
  double rmse = 0.0;  ///< log-space residual of the fit
  std::size_t fitted_points = 0;
};

/// Level-set distribution of |b - b_B| on one ball (b_B the unweighted mean,
/// measured with w) and the fit ln(dist) = ln C1 - C2 beta/||b||_*. Thresholds
/// run from beta_lo ||b||_* on a grid of `samples` values up to the largest
/// beta whose level set still holds `min_nodes` nodes.
template <std::floating_point Scalar>
JohnNirenbergReport john_nirenberg_probe(const GridFunction<Scalar>& b, const Weight& w, const Ball& ball,
                                         double bmo, double beta_lo = 1.0, int samples = 24,
                                         std::size_t min_nodes = 5) {
  JohnNirenbergReport rep;
  rep.bmo = bmo;
  const BallNodes nodes = ball_nodes(b.grid(), ball);
  const double mean = ball_mean(b, ball);
  std::vector<std::pair<double, double>> dev;
  double wb = 0.0;
  for (std::size_t i : nodes.indices) {
    dev.emplace_back(std::abs(double(b[i]) - mean), w[i]);
    wb += w[i];
  }
  std::sort(dev.begin(), dev.end(), [](const auto& a, const auto& c) { return a.first > c.first; });
  if (!(bmo > 0.0) || dev.size() < min_nodes || dev[min_nodes - 1].first <= 0.0) return rep;
  const double beta_hi = std::nextafter(dev[min_nodes - 1].first, 0.0);
  const double lo = beta_lo * bmo;
  if (!(beta_hi > lo)) return rep;
  auto level = [&](double beta) {
    double s = 0.0;
    for (const auto& d : dev) {
      if (d.first <= beta) break;
      s += d.second;
    }
    return s / wb;
  };
  for (int i = 0; i < samples; ++i) {
    const double beta = lo + (beta_hi - lo) * i / std::max(1, samples - 1);
    rep.beta.push_back(beta);
    rep.distribution.push_back(level(beta));
  }
  // Least squares of y = ln dist on u = beta / bmo.
  std::vector<double> u, y;
  for (std::size_t i = 0; i < rep.beta.size(); ++i) {
    if (rep.distribution[i] <= 0.0) continue;
    u.push_back(rep.beta[i] / bmo);
    y.push_back(std::log(rep.distribution[i]));
  }
  rep.fitted_points = u.size();
  if (u.size() < 2) return rep;
  const double nu = double(u.size());
  const double mu = std::accumulate(u.begin(), u.end(), 0.0) / nu;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nu;
  double suu = 0.0, suy = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    suu += (u[i] - mu) * (u[i] - mu);
    suy += (u[i] - mu) * (y[i] - my);
  }
  const double slope = suu > 0.0 ? suy / suu : 0.0;
  const double icpt = my - slope * mu;
  rep.C2 = -slope;
  rep.C1 = std::exp(icpt);
  double ss = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double r = y[i] - (icpt + slope * u[i]);
    ss += r * r;
  }
  rep.rmse = std::sqrt(ss / nu);
  return rep;
}

struct OscillationEquivalence {
  std::vector<double> p;
  std::vector<double> sup;    ///< sup_B ((1/w(B)) int_B |b - b_B|^p w)^{1/p}
  std::vector<double> ratio;  ///< sup / sup at p = 1 (p[0] must be 1)
  std::string family_id;
};

/// The L^p oscillation sups for each p, with b_B the unweighted mean.
template <std::floating_point Scalar>
OscillationEquivalence oscillation_equivalence(const GridFunction<Scalar>& b, const Weight& w,
                                               const BallFamily& family,
                                               std::vector<double> ps = {1.0, 2.0, 4.0}) {
  OscillationEquivalence out;
  out.p = ps;
  out.family_id = family.id();
  out.sup.assign(ps.size(), 0.0);
  const BallFamily fam = family.on(b.grid());
  for (const Ball& ball : fam.balls()) {
    const BallNodes nodes = ball_nodes(b.grid(), ball);
    const double mean = ball_mean(b, ball);
    for (std::size_t q = 0; q < ps.size(); ++q) {
      double s = 0.0, sw = 0.0;
      for (std::size_t i : nodes.indices) {
        s += std::pow(std::abs(double(b[i]) - mean), ps[q]) * w[i];
        sw += w[i];
      }
      out.sup[q] = std::max(out.sup[q], std::pow(s / sw, 1.0 / ps[q]));
    }
  }
  for (double s : out.sup) out.ratio.push_back(out.sup.front() > 0.0 ? s / out.sup.front() : 0.0);
  return out;
}

}  // namespace sqfn
