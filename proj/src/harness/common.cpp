#include "common.hpp"

#include <cmath>
#include <numeric>

namespace sqfn::harness {

double pget(const Json& params, const char* key, double fallback) {
  return params.contains(key) ? params.at(key).get<double>() : fallback;
}

int pint(const Json& params, const char* key, int fallback) {
  return params.contains(key) ? params.at(key).get<int>() : fallback;
}

std::string pstr(const Json& params, const char* key, const std::string& fallback) {
  return params.contains(key) ? params.at(key).get<std::string>() : fallback;
}

std::vector<double> pvec(const Json& params, const char* key, std::vector<double> fallback) {
  if (!params.contains(key)) return fallback;
  return params.at(key).get<std::vector<double>>();
}

int fine_points(const ExperimentConfig& cfg) { return cfg.grid.points; }
int coarse_points(const ExperimentConfig& cfg) { return (cfg.grid.points + 1) / 2; }

Weight make_weight(const ExperimentConfig& cfg, const Grid& g) {
  return cfg.weight.kind == "constant" ? Weight::constant(g, cfg.weight.parameter)
                                       : Weight::power(g, cfg.weight.parameter);
}

BallFamily make_family(const ExperimentConfig& cfg, const Grid& g) {
  const FamilySpec& f = cfg.family;
  return BallFamily::lattice(g, f.centers, f.center_extent, f.radii, f.r_min, f.r_max);
}

KernelDictionary<double> make_dict(const ExperimentConfig& cfg, double alpha) {
  return make_dictionary<double>(cfg.grid.dim, alpha, cfg.kernel.size, 0, cfg.seed);
}

Resolution make_resolution(const ExperimentConfig& cfg, int points) {
  Grid g(cfg.grid.dim, cfg.grid.half_width, points);
  return Resolution{g, make_weight(cfg, g), ScaleGrid::for_grid(g, cfg.per_octave), make_family(cfg, g),
                    make_corpus(g, cfg.seed)};
}

std::vector<AlphaTable> alpha_tables(const VecGridFunction<double>& f, const StencilBank<double>& bank) {
  std::vector<AlphaTable> out;
  for (const auto& c : f.all()) out.emplace_back(c, bank);
  return out;
}

namespace {

template <class Fn>
std::vector<double> summed(const std::vector<AlphaTable>& t, Fn&& fn) {
  std::vector<double> acc;
  for (const auto& a : t) {
    const auto v = fn(a);
    if (acc.empty()) acc.assign(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
  }
  return acc;
}

}  // namespace

std::vector<double> cone_sq(const std::vector<AlphaTable>& t, double beta, bool closed) {
  return summed(t, [&](const AlphaTable& a) { return cone_square_sums(a, beta, closed); });
}

std::vector<double> vertical_sq(const std::vector<AlphaTable>& t) {
  return summed(t, [](const AlphaTable& a) { return vertical_square_sums(a); });
}

std::vector<double> gstar_sq(const std::vector<AlphaTable>& t, double lambda) {
  return summed(t, [&](const AlphaTable& a) { return gstar_square_sums(a, lambda); });
}

GridFunctiond sqrt_field(const Grid& g, const std::vector<double>& squares) {
  GridFunctiond::Values v(Eigen::Index(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) v[Eigen::Index(i)] = std::sqrt(squares[i]);
  return GridFunctiond(g, std::move(v));
}

double lp_box(const GridFunctiond& f, const Weight& w, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(std::abs(f[i]), p) * w[i];
  return std::pow(s * f.grid().cell_volume(), 1.0 / p);
}

TailRhs ball_tail_rhs(const GridFunctiond& fnorm, const Weight& w, double p, const Ball& ball, int korder,
                      double T, int per_octave) {
  TailRhs out;
  const double r = ball.radius;
  if (!(T > 2.0 * r)) return out;
  std::vector<double> t;
  for (int i = 0;; ++i) {
    const double v = 2.0 * r * std::exp2(double(i) / per_octave);
    if (v >= T * (1.0 - kTieTolerance)) break;
    t.push_back(v);
  }
  t.push_back(T);
  std::vector<double> f(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Ball bt{ball.center, t[i]};
    const double local = lp_w_ball(fnorm, w, p, bt);
    f[i] = local * std::pow(analytic_measure(w, bt), -1.0 / p);
    if (korder > 0) f[i] *= std::pow(std::log(M_E + t[i] / r), korder);
  }
  double total = 0.0, last = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double piece = 0.5 * std::log(t[i + 1] / t[i]) * (f[i] + f[i + 1]);
    total += piece;
    if (t[i] >= 0.5 * T * (1.0 - kTieTolerance)) last += piece;
  }
  const double wb = std::pow(analytic_measure(w, ball), 1.0 / p);
  out.value = wb * total;
  out.last_octave = total > 0.0 ? last / total : 0.0;
  return out;
}

BallFit fit_ball_constant(const std::vector<OpField>& fields, const Weight& w, double p, const BallFamily& fam,
                          int korder, double bmo_k, bool weak) {
  BallFit fit;
  const Grid& g = w.grid();
  const BallFamily on = fam.on(g);
  fit.argmax = on.balls().front();
  const double T = 2.0 * g.half_width();
  for (const Ball& ball : on.balls()) {
    for (const auto& f : fields) {
      const double lhs = weak ? weak_lp_w_ball(f.op, w, p, ball) : lp_w_ball(f.op, w, p, ball);
      const TailRhs rhs = ball_tail_rhs(f.fnorm, w, p, ball, korder, T);
      const double R = bmo_k * rhs.value;
      ++fit.pairs;
      if (lhs == 0.0 && R == 0.0) {
        ++fit.vacuous;
        continue;
      }
      const double c = R > 0.0 ? lhs / R : INFINITY;
      if (c > fit.c_fit) {
        fit.c_fit = c;
        fit.argmax = ball;
        fit.argmax_field = f.name;
      }
      fit.last_octave = std::max(fit.last_octave, rhs.last_octave);
      if (lp_w_ball(f.fnorm, w, 1.0, ball.scaled(2.0)) == 0.0) fit.c_far = std::max(fit.c_far, c);
    }
  }
  return fit;
}

double drift(double a, double b) {
  if (a == b) return 0.0;
  if (b == 0.0) return INFINITY;
  return std::abs(a / b - 1.0);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const double n = double(x.size());
  if (x.size() < 2) return f;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return f;
}

double log_floor(const ExperimentConfig& cfg) {
  return cfg.grid.half_width / (coarse_points(cfg) - 1);
}

GridFunctiond log_symbol(const Grid& g, double floor) {
  return sample(g, [&](const Point& x) { return std::log(std::max(x.norm(), floor)); });
}

GridFunctiond linear_symbol(const Grid& g) {
  return sample(g, [](const Point& x) { return x[0]; });
}

Json ball_json(const Ball& b, int dim) { return io::to_json(b, dim); }

}  // namespace sqfn::harness
