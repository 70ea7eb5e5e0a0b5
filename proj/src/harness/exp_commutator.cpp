#include "common.hpp"
#include "experiments.hpp"

#include <array>
#include <cmath>
#include <map>

namespace sqfn::harness {

namespace {

GridFunctiond symbol(const std::string& name, const Grid& g, double floor) {
  if (name == "linear") return linear_symbol(g);
  if (name == "log") return log_symbol(g, floor);
  throw Error("ball_estimate_commutator: unknown symbol '" + name + "' (linear or log)");
}

GridFunctiond comm_field(const VecGridFunction<double>& f, const StencilBank<double>& bank, const GridFunctiond& b,
                         int k) {
  return vector_apply([&](const GridFunctiond& c) { return comm_g_sq_field(c, bank, b, k); }, f);
}

}  // namespace

ExperimentReport exp_ball_estimate_commutator(const ExperimentConfig& cfg, const Json& params) {
  ExperimentReport rep;
  rep.name = "ball_estimate_commutator";
  const double p = pget(params, "p", 2.0);
  std::vector<int> korders{1, 2};
  if (params.contains("korders")) korders = params.at("korders").get<std::vector<int>>();
  std::vector<std::string> symbols{"linear", "log"};
  if (params.contains("symbols")) symbols = params.at("symbols").get<std::vector<std::string>>();
  const double family_drift = pget(params, "family_drift", 0.25);
  const double refine_drift = pget(params, "refinement_drift", 0.10);
  const double r2_min = pget(params, "r2_min", 0.9);
  rep.params = Json{{"p", p}, {"korders", korders}, {"symbols", symbols}, {"family_drift", family_drift},
                    {"refinement_drift", refine_drift}, {"r2_min", r2_min}};
  const int n = cfg.grid.dim;
  const int ms[2] = {coarse_points(cfg), fine_points(cfg)};
  const auto dict = make_dict(cfg, cfg.kernel.alpha);

  std::map<std::string, std::array<double, 3>> cfit;  // coarse, fine, enlarged
  for (int level = 0; level < 2; ++level) {
    const Resolution res = make_resolution(cfg, ms[level]);
    const Grid& g = res.grid;
    const Weight& w = res.weight;
    const StencilBank<double> bank(g, dict, res.scales);
    const std::string mtag = "m=" + std::to_string(ms[level]);
    const BallFamily big = res.family.enlarged();
    const double T = 2.0 * g.half_width();

    for (const auto& sname : symbols) {
      const GridFunctiond b = symbol(sname, g, log_floor(cfg));
      const double bmo = bmo_norm(b, res.family).value;
      const double bmo_big = level == 1 ? bmo_norm(b, big).value : 0.0;
      rep.fitted["bmo[" + sname + "," + mtag + "]"] = io::number(bmo);
      for (int k : korders) {
        const std::string key = sname + ",k=" + std::to_string(k);
        std::vector<OpField> fields;
        for (const auto& cf : res.corpus) fields.push_back({cf.name, comm_field(cf.field, bank, b, k), l2_pointwise(cf.field)});
        const BallFit fit = fit_ball_constant(fields, w, p, res.family, k, std::pow(bmo, k), false);
        cfit[key][std::size_t(level)] = fit.c_fit;
        rep.check("C_fit_finite[" + key + "," + mtag + "]", "finite", fit.c_fit, 0.0);
        rep.fitted["C_fit[" + key + "," + mtag + "]"] =
            Json{{"value", io::number(fit.c_fit)}, {"ball", ball_json(fit.argmax, n)}, {"field", fit.argmax_field},
                 {"last_octave_share", io::number(fit.last_octave)}};
        if (level == 0) continue;
        cfit[key][2] = fit_ball_constant(fields, w, p, big, k, std::pow(bmo_big, k), false).c_fit;

        // A(x) + B(x) split: [b,G]^k f(x) <= sum_i C(k,i) |b(x) - c|^{k-i} G((b - c)^i f)(x), c = b_{B,w}.
        double split = 0.0;
        const auto& centers = res.family.centers();
        const auto& radii = res.family.radii();
        for (std::size_t ci = 0; ci < centers.size(); ci += 2)
          for (std::size_t ri = 0; ri < radii.size(); ri += 2) {
            const Ball ball{centers[ci], radii[ri]};
            const double c = weighted_ball_mean(b, w, ball);
            const GridFunctiond dev(g, b.values() - c, b.exterior() - c);
            const BallNodes nodes = ball_nodes(g, ball);
            for (std::size_t fi = 0; fi < res.corpus.size(); ++fi) {
              const auto& cf = res.corpus[fi];
              if (cf.field.components() != 1) continue;
              std::vector<GridFunctiond> parts;
              GridFunctiond power = cf.field[0];
              for (int i = 0; i <= k; ++i) {
                parts.push_back(g_sq_field(power, bank).field);
                power = power * dev;
              }
              for (std::size_t node : nodes.indices) {
                double bound = 0.0;
                for (int i = 0; i <= k; ++i)
                  bound += detail::binomial(k, i) * detail::pow_int(std::abs(dev[node]), k - i) * parts[std::size_t(i)][node];
                const double lhs = fields[fi].op[node];
                if (lhs == 0.0) continue;
                split = std::max(split, bound > 0.0 ? lhs / bound : INFINITY);
              }
            }
          }
        rep.check("split_A_plus_B[" + key + "]", "le", split, 1.0, 1e-9);
        rep.fitted["split_utilization[" + key + "]"] = io::number(split);

        // Logarithmic BMO pair estimates used for A and B.
        const LogPairReport lp = bmo_log_pair_check(b, w, res.family, k, p);
        const LogPairReport lpb = bmo_log_pair_check(b, w, big, k, p);
        rep.extra["log_pair[" + key + "]"] = io::to_json(lp);
        rep.extra["log_pair_enlarged[" + key + "]"] = io::to_json(lpb);
        rep.check("log_pair_finite[" + key + "]", "finite", lp.fitted_constant, 0.0);
        rep.check("log_pair_dual_finite[" + key + "]", "finite", lp.fitted_constant_dual, 0.0);
        rep.check("log_pair_family_drift[" + key + "]", "lt", drift(lpb.fitted_constant, lp.fitted_constant),
                  family_drift);
        rep.check("log_pair_dual_family_drift[" + key + "]", "lt",
                  drift(lpb.fitted_constant_dual, lp.fitted_constant_dual), family_drift);

        // r-sweep at the central center for the centred bump.
        const Point x0 = centers[centers.size() / 2];
        std::vector<double> xs, ys;
        io::Table& t = rep.plots["commutator_rsweep_" + sname + "_k" + std::to_string(k)];
        t.header = {"r", "lhs", "rhs", "log_log_factor", "log_ratio"};
        for (int i = 0;; ++i) {
          const double r = 2.0 * g.spacing() * std::exp2(i / 4.0);
          if (r > cfg.family.r_max * (1.0 + kTieTolerance)) break;
          const Ball ball{x0, r};
          const double lhs = lp_w_ball(fields[0].op, w, p, ball);
          const double rhs = std::pow(bmo, k) * ball_tail_rhs(fields[0].fnorm, w, p, ball, k, T).value;
          if (!(lhs > 0.0) || !(rhs > 0.0)) continue;
          const double x = std::log(std::log(M_E + T / r));
          xs.push_back(x);
          ys.push_back(std::log(rhs / lhs));
          t.rows.push_back({r, lhs, rhs, x, ys.back()});
        }
        const LineFit lf = fit_line(xs, ys);
        rep.fitted["rsweep[" + key + "]"] =
            Json{{"slope", io::number(lf.slope)}, {"intercept", io::number(lf.intercept)}, {"r2", io::number(lf.r2)},
                 {"points", xs.size()}};
        rep.check("rsweep_r2[" + key + "]", "ge", lf.r2, r2_min, 0.0);
        rep.extra["rsweep_slope[" + key + "]"] = io::number(lf.slope);
      }
      if (level == 1) {
        for (std::size_t q = 1; q < korders.size(); ++q) {
          const std::string lo = sname + ",k=" + std::to_string(korders[q - 1]);
          const std::string hi = sname + ",k=" + std::to_string(korders[q]);
          rep.check("rsweep_slope_increases_with_k[" + sname + "," + std::to_string(korders[q - 1]) + "->" +
                        std::to_string(korders[q]) + "]",
                    "ge", io::to_double(rep.extra["rsweep_slope[" + hi + "]"]),
                    io::to_double(rep.extra["rsweep_slope[" + lo + "]"]), 0.0);
        }
      }
    }
    if (level == 1) {
      const GridFunctiond cb = GridFunctiond::constant(g, 2.5);
      const GridFunctiond& f0 = res.corpus.front().field[0];
      rep.check("constant_symbol_zero", "eq", comm_g_sq_field(f0, bank, cb, 1).field.max_abs(), 0.0, 0.0);
      const CommutatorTables<double> tab(f0, cb, 1, bank);
      double m = 0.0;
      for (double v : detail::comm_square_sums(tab, detail::CommKind::Cone, 1.0, 0.0)) m = std::max(m, v);
      rep.check("constant_symbol_zero[table_path]", "eq", m, 0.0, 0.0);
    }
  }
  for (const auto& [key, c] : cfit) {
    rep.check("family_drift[" + key + "]", "lt", drift(c[2], c[1]), family_drift);
    rep.check("refinement_drift[" + key + "]", "lt", drift(c[1], c[0]), refine_drift);
    rep.refinement["C_fit[" + key + "]"] =
        Json{{"m_coarse", ms[0]}, {"m_fine", ms[1]}, {"coarse", c[0]}, {"fine", c[1]}, {"enlarged", c[2]}};
  }
  return rep;
}

}  // namespace sqfn::harness
