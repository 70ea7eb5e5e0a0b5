#include "common.hpp"
#include "experiments.hpp"

#include <cmath>

namespace sqfn::harness {

namespace {

Json fit_json(const BallFit& f, int dim) {
  return Json{{"C_fit", io::number(f.c_fit)},
              {"argmax_ball", ball_json(f.argmax, dim)},
              {"argmax_field", f.argmax_field},
              {"C_far_support", io::number(f.c_far)},
              {"last_octave_share", io::number(f.last_octave)},
              {"pairs", f.pairs},
              {"vacuous_pairs", f.vacuous}};
}

}  // namespace

ExperimentReport exp_ball_estimate_G(const ExperimentConfig& cfg, const Json& params) {
  ExperimentReport rep;
  rep.name = "ball_estimate_G";
  const double p = pget(params, "p", 2.0);
  const double weak_gamma = pget(params, "weak_gamma", -0.5);
  const double family_drift = pget(params, "family_drift", 0.25);
  const double refine_drift = pget(params, "refinement_drift", 0.10);
  rep.params = Json{{"p", p}, {"weak_p", 1.0}, {"weak_gamma", weak_gamma},
                    {"family_drift", family_drift}, {"refinement_drift", refine_drift}};
  const int n = cfg.grid.dim;
  const int ms[2] = {coarse_points(cfg), fine_points(cfg)};
  const auto dict = make_dict(cfg, cfg.kernel.alpha);

  double strong[2] = {0, 0}, weak[2] = {0, 0}, strong_enl = 0, weak_enl = 0;
  for (int level = 0; level < 2; ++level) {
    const Resolution res = make_resolution(cfg, ms[level]);
    const Grid& g = res.grid;
    const StencilBank<double> bank(g, dict, res.scales);
    std::vector<OpField> fields;
    for (const auto& cf : res.corpus)
      fields.push_back({cf.name, sqrt_field(g, cone_sq(alpha_tables(cf.field, bank), 1.0, false)),
                        l2_pointwise(cf.field)});
    const Weight w1 = Weight::power(g, weak_gamma);
    const BallFit s = fit_ball_constant(fields, res.weight, p, res.family, 0, 1.0, false);
    const BallFit wk = fit_ball_constant(fields, w1, 1.0, res.family, 0, 1.0, true);
    strong[level] = s.c_fit;
    weak[level] = wk.c_fit;
    const std::string m = "m=" + std::to_string(ms[level]);
    rep.fitted["strong[" + m + "]"] = fit_json(s, n);
    rep.fitted["weak_p1[" + m + "]"] = fit_json(wk, n);
    rep.check("C_fit_finite[strong," + m + "]", "finite", s.c_fit, 0.0);
    rep.check("C_fit_finite[weak_p1," + m + "]", "finite", wk.c_fit, 0.0);
    if (level == 1) {
      const BallFamily big = res.family.enlarged();
      const BallFit se = fit_ball_constant(fields, res.weight, p, big, 0, 1.0, false);
      const BallFit we = fit_ball_constant(fields, w1, 1.0, big, 0, 1.0, true);
      strong_enl = se.c_fit;
      weak_enl = we.c_fit;
      rep.fitted["strong[enlarged]"] = fit_json(se, n);
      rep.fitted["weak_p1[enlarged]"] = fit_json(we, n);
      rep.fitted["family_id"] = res.family.id();
      rep.fitted["enlarged_family_id"] = big.id();

      const GridFunctiond zero = GridFunctiond::zero(g);
      const GridFunctiond Gz = g_sq_field(zero, bank).field;
      double lz = 0.0, rz = 0.0;
      for (const Ball& b : res.family.balls()) {
        lz = std::max(lz, lp_w_ball(Gz, res.weight, p, b));
        rz = std::max(rz, ball_tail_rhs(zero, res.weight, p, b, 0, 2.0 * g.half_width()).value);
      }
      rep.check("zero_field", "le", lz, rz, 0.0);

      // C(r) curve for the centred bump at the central family center.
      io::Table& t = rep.plots["ball_G_ratio_vs_r"];
      t.header = {"r", "lhs", "rhs", "ratio"};
      const Point c0 = res.family.centers()[res.family.centers().size() / 2];
      for (double r : res.family.radii()) {
        const Ball b{c0, r};
        const double lhs = lp_w_ball(fields[0].op, res.weight, p, b);
        const double rhs = ball_tail_rhs(fields[0].fnorm, res.weight, p, b, 0, 2.0 * g.half_width()).value;
        t.rows.push_back({r, lhs, rhs, rhs > 0 ? lhs / rhs : 0.0});
      }
    }
  }
  rep.check("family_drift[strong]", "lt", drift(strong_enl, strong[1]), family_drift);
  rep.check("family_drift[weak_p1]", "lt", drift(weak_enl, weak[1]), family_drift);
  rep.check("refinement_drift[strong]", "lt", drift(strong[1], strong[0]), refine_drift);
  rep.check("refinement_drift[weak_p1]", "lt", drift(weak[1], weak[0]), refine_drift);
  rep.refinement = Json{{"m_coarse", ms[0]},
                        {"m_fine", ms[1]},
                        {"strong", {{"coarse", strong[0]}, {"fine", strong[1]}}},
                        {"weak_p1", {{"coarse", weak[0]}, {"fine", weak[1]}}}};
  return rep;
}

}  // namespace sqfn::harness
