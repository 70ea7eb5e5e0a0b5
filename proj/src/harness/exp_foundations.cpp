#include "common.hpp"
#include "experiments.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace sqfn::harness {

namespace {

double unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

/// Fields with repeated values and zeros, so the level-set code sees ties.
GridFunctiond random_field(const Grid& g, std::mt19937_64& rng) {
  GridFunctiond::Values v(Eigen::Index(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) v[Eigen::Index(i)] = std::round(16.0 * unit(rng) - 8.0) / 4.0;
  return GridFunctiond(g, std::move(v));
}

}  // namespace

ExperimentReport exp_space_foundations(const ExperimentConfig& cfg, const Json& params) {
  ExperimentReport rep;
  rep.name = "space_foundations";
  const int samples = pint(params, "random_fields", 100);
  const double kappa = pget(params, "kappa", 0.5);
  const double p = pget(params, "p", 2.0);
  const double lambda = pget(params, "morrey_lambda", 0.5);
  const double v_gamma = pget(params, "v_gamma", -0.25);
  const double jn_rmse = pget(params, "jn_rmse", 0.2);
  const double stability = pget(params, "enlargement_drift", 0.25);
  rep.params = Json{{"random_fields", samples}, {"kappa", kappa}, {"p", p}, {"morrey_lambda", lambda},
                    {"v_gamma", v_gamma}, {"jn_rmse", jn_rmse}, {"enlargement_drift", stability}};
  const Resolution res = make_resolution(cfg, fine_points(cfg));
  const Grid& g = res.grid;
  const int n = g.dim();
  const Weight& w = res.weight;
  const Weight one = Weight::constant(g, 1.0);
  const BallFamily big = res.family.enlarged();
  const auto& balls = res.family.balls();

  // weak <= strong
  {
    std::mt19937_64 rng(cfg.seed ^ 0x7765616BULL);
    double worst = 0.0;
    std::size_t count = 0;
    for (int s = 0; s < samples; ++s) {
      const GridFunctiond f = random_field(g, rng);
      for (const Ball& b : balls)
        for (double q : {1.0, 2.0}) {
          for (const Weight* wt : {&one, &w}) {
            const double weak = weak_lp_w_ball(f, *wt, q, b);
            const double strong = lp_w_ball(f, *wt, q, b);
            ++count;
            if (weak > 0.0) worst = std::max(worst, strong > 0.0 ? weak / strong : INFINITY);
          }
        }
    }
    rep.check("weak_le_strong", "le", worst, 1.0, 0.0);
    rep.fitted["weak_over_strong_max"] = io::number(worst);
    rep.fitted["weak_le_strong_pairs"] = count;
  }

  std::vector<GridFunctiond> fields;
  for (const auto& cf : res.corpus) fields.push_back(l2_pointwise(cf.field));

  double id1 = 0.0, id2 = 0.0, id2c = 0.0, id3 = 0.0, id5 = 0.0, id5box = 0.0;
  double br_lo = INFINITY, br_hi = 0.0, ratio_lo = INFINITY, ratio_hi = 0.0;
  for (const Ball& b : balls) {
    const BallNodes nodes = ball_nodes(g, b);
    const double c = std::pow(std::pow(b.radius, n) / nodes.measure(), 1.0 / p);
    br_lo = std::min(br_lo, c);
    br_hi = std::max(br_hi, c);
  }
  const PhiFunction phi_pow = PhiFunction::power(lambda, p, n);
  const PhiFunction phi_wm = PhiFunction::weighted_morrey(kappa, p, w);
  const PhiFunction phi_custom = PhiFunction::custom("w(B)^((kappa-1)/p)", [&](const Point& x, double r) {
    return std::pow(measure(w, Ball{x, r}), (kappa - 1.0) / p);
  });
  const Weight v = Weight::power(g, v_gamma);
  const PhiFunction phi_two = PhiFunction::two_weight(kappa, p, v, w);
  const PhiFunction phi_k0 = PhiFunction::weighted_morrey(0.0, p, w);
  auto rel = [](double a, double b) { return a == b ? 0.0 : std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
  for (const auto& f : fields) {
    double d1 = 0.0, d2 = 0.0, d3 = 0.0, d4 = 0.0, d5 = 0.0;
    for (const Ball& b : balls) {
      const BallNodes nodes = ball_nodes(g, b);
      double s = 0.0, cnt = 0.0;
      for (std::size_t i : nodes.indices) {
        s += std::pow(std::abs(f[i]), p) * 1.0;
        cnt += 1.0;
      }
      const double local = std::pow(s * nodes.node_weight, 1.0 / p);
      d1 = std::max(d1, 1.0 / (std::pow(b.radius, (lambda - n) / p) * std::pow(cnt * nodes.node_weight, 1.0 / p)) * local);
      d4 = std::max(d4, std::pow(b.radius, -lambda / p) * local);
      const double lw = lp_w_ball(f, w, p, b);
      d2 = std::max(d2, std::pow(measure(w, b), -kappa / p) * lw);
      d3 = std::max(d3, std::pow(measure(v, b), -kappa / p) * lw);
      d5 = std::max(d5, lw);
    }
    id1 = std::max(id1, rel(morrey_norm(f, one, p, phi_pow, res.family).value, d1));
    id2 = std::max(id2, rel(morrey_norm(f, w, p, phi_wm, res.family).value, d2));
    id2c = std::max(id2c, rel(morrey_norm(f, w, p, phi_custom, res.family).value, d2));
    id3 = std::max(id3, rel(morrey_norm(f, w, p, phi_two, res.family).value, d3));
    id5 = std::max(id5, rel(morrey_norm(f, w, p, phi_k0, res.family).value, d5));
    const double box = lp_box(f, w, p);
    if (box > 0.0) id5box = std::max(id5box, morrey_norm(f, w, p, phi_k0, res.family).value / box);
    if (d4 > 0.0) {
      const double r = morrey_norm(f, one, p, phi_pow, res.family).value / d4;
      ratio_lo = std::min(ratio_lo, r);
      ratio_hi = std::max(ratio_hi, r);
    }
  }
  rep.check("collapse_unweighted_exact", "eq", id1, 0.0, 0.0);
  rep.check("collapse_weighted_morrey_exact", "eq", id2, 0.0, 0.0);
  rep.check("collapse_weighted_morrey_generic_path", "le", id2c, 1e-12, 0.0);
  rep.check("collapse_two_weight", "le", id3, 1e-12, 0.0);
  rep.check("classical_morrey_ratio_lower", "ge", ratio_lo, br_lo, 1e-12);
  rep.check("classical_morrey_ratio_upper", "le", ratio_hi, br_hi, 1e-12);
  rep.check("kappa_zero_is_local_sup", "eq", id5, 0.0, 0.0);
  rep.check("kappa_zero_below_box_norm", "le", id5box, 1.0, 1e-12);
  rep.fitted["classical_ratio"] = Json{{"min", io::number(ratio_lo)}, {"max", io::number(ratio_hi)},
                                       {"bracket_min", io::number(br_lo)}, {"bracket_max", io::number(br_hi)}};

  // John-Nirenberg level sets of ln|x|.
  const GridFunctiond b = log_symbol(g, log_floor(cfg));
  const double bmo = bmo_norm(b, res.family).value;
  const double bmo_w = bmo_norm_weighted(b, w, res.family).value;
  rep.fitted["bmo_log"] = io::number(bmo);
  rep.fitted["bmo_log_weighted"] = io::number(bmo_w);
  for (const double R : pvec(params, "jn_radii", {2.0, 4.0})) {
    const Ball ball{Point::Zero(), R};
    std::ostringstream tag;
    tag << "R=" << R;
    const JohnNirenbergReport jn = john_nirenberg_probe(b, one, ball, bmo);
    rep.extra["john_nirenberg[" + tag.str() + "]"] = io::to_json(jn);
    rep.check("john_nirenberg_rmse[" + tag.str() + "]", "le", jn.rmse, jn_rmse, 0.0);
    rep.check("john_nirenberg_decay[" + tag.str() + "]", "ge", jn.C2, 0.0, 0.0);
    rep.extra["john_nirenberg_weighted[" + tag.str() + "]"] = io::to_json(john_nirenberg_probe(b, w, ball, bmo_w));
  }

  // Weighted and unweighted oscillation norms.
  const OscillationEquivalence oe = oscillation_equivalence(b, w, res.family);
  const OscillationEquivalence oeb = oscillation_equivalence(b, w, big);
  rep.extra["oscillation"] = io::to_json(oe);
  rep.extra["oscillation_enlarged"] = io::to_json(oeb);
  for (std::size_t i = 1; i < oe.p.size(); ++i) {
    std::ostringstream tag;
    tag << "p=" << oe.p[i];
    rep.check("oscillation_ratio_finite[" + tag.str() + "]", "finite", oe.ratio[i], 0.0);
    rep.check("oscillation_ratio_stable[" + tag.str() + "]", "lt", drift(oeb.ratio[i], oe.ratio[i]), stability);
  }
  const double bmo_big = bmo_norm(b, big).value;
  const double bmo_w_big = bmo_norm_weighted(b, w, big).value;
  rep.check("weighted_bmo_ratio_stable", "lt", drift(bmo_w_big / bmo_big, bmo_w / bmo), stability);
  rep.fitted["weighted_over_unweighted_bmo"] =
      Json{{"base", io::number(bmo_w / bmo)}, {"enlarged", io::number(bmo_w_big / bmo_big)}};

  // Membership of the configured weight.
  const WeightDiagnostics diag = diagnose(w, p, res.family);
  rep.extra["weight"] = io::to_json(diag);
  const double growth =
      refinement_growth(w, res.family, [&](const Weight& x, const BallFamily& f) { return ap_characteristic(x, p, f); });
  rep.fitted["ap_refinement_growth"] = io::number(growth);
  rep.check("weight_ap_growth", "lt", growth, 0.25);
  const ReverseDoublingFit rd = check_reverse_doubling(w, p, res.family);
  rep.extra["reverse_doubling"] = io::to_json(rd);
  rep.check("reverse_doubling_delta_positive", "lt", 0.0, rd.delta, 0.0);
  rep.check("reverse_doubling_holdout", "le", rd.holdout_worst, 1.0, 1e-2);
  return rep;
}

}  // namespace sqfn::harness
