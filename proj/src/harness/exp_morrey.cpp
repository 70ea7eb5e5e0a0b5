#include "common.hpp"
#include "experiments.hpp"

#include <cmath>
#include <array>
#include <map>

namespace sqfn::harness {

namespace {

struct PairSpec {
  std::string name;
  Weight w;
  double p;
  PhiFunction phi;       // norms
  PhiFunction phi_cond;  // condition evaluation
  bool weak;
};

}  // namespace

ExperimentReport exp_morrey_boundedness(const ExperimentConfig& cfg, const Json& params) {
  ExperimentReport rep;
  rep.name = "morrey_boundedness";
  const double lambda = pget(params, "lambda", 4.0);
  const double morrey_lambda = pget(params, "morrey_lambda", 0.5);
  const double kappa = pget(params, "kappa", 0.5);
  const double p = pget(params, "p", 2.0);
  const double family_drift = pget(params, "family_drift", 0.25);
  rep.params = Json{{"lambda", lambda}, {"morrey_lambda", morrey_lambda}, {"kappa", kappa}, {"p", p},
                    {"weak_p", 1.0}, {"family_drift", family_drift}};
  const int n = cfg.grid.dim;
  if (std::abs(lambda - (3.0 + cfg.kernel.alpha / n)) <= 1e-12 * lambda)
    rep.flags.push_back("g_star lambda sits on the boundary 3 + alpha/n; run as a probe");
  const int ms[2] = {coarse_points(cfg), fine_points(cfg)};
  const auto dict = make_dict(cfg, cfg.kernel.alpha);

  std::map<std::string, std::array<double, 2>> trend;
  for (int level = 0; level < 2; ++level) {
    const Resolution res = make_resolution(cfg, ms[level]);
    const Grid& g = res.grid;
    const StencilBank<double> bank(g, dict, res.scales);
    const std::string mtag = "m=" + std::to_string(ms[level]);
    const BallFamily big = res.family.enlarged();
    const GridFunctiond b = log_symbol(g, log_floor(cfg));
    const double bmo = bmo_norm(b, res.family).value;
    const double bmo_big = bmo_norm(b, big).value;

    const Weight one = Weight::constant(g, 1.0);
    std::vector<PairSpec> pairs;
    {
      const PhiFunction phi = PhiFunction::power(morrey_lambda, p, n);
      pairs.push_back({"classical", one, p, phi, phi, false});
      pairs.push_back({"weighted_morrey", res.weight, p, PhiFunction::weighted_morrey(kappa, p, res.weight),
                       PhiFunction::weighted_morrey(kappa, p, res.weight, MeasureMode::Analytic), false});
      const PhiFunction weak = PhiFunction::power(0.0, 1.0, n);
      pairs.push_back({"weak_p1", one, 1.0, weak, weak, true});
    }
    const auto pts = condition_points(res.family.centers(), cfg.family.r_min, cfg.family.r_max, 4);

    // operator fields over the corpus, shared by the pairs
    std::vector<std::string> names{"G", "g", "g_star", "comm_G_log"};
    std::map<std::string, std::vector<GridFunctiond>> ops;
    double ratio_min = INFINITY, ratio_max = 0.0;
    for (const auto& cf : res.corpus) {
      const auto tables = alpha_tables(cf.field, bank);
      const GridFunctiond G = sqrt_field(g, cone_sq(tables, 1.0, false));
      const GridFunctiond gv = sqrt_field(g, vertical_sq(tables));
      ops["G"].push_back(G);
      ops["g"].push_back(gv);
      ops["g_star"].push_back(sqrt_field(g, gstar_sq(tables, lambda)));
      ops["comm_G_log"].push_back(
          vector_apply([&](const GridFunctiond& c) { return comm_g_sq_field(c, bank, b, 1); }, cf.field));
      for (std::size_t i = 0; i < g.size(); ++i)
        if (G[i] > 0.0) {
          ratio_min = std::min(ratio_min, gv[i] / G[i]);
          ratio_max = std::max(ratio_max, gv[i] / G[i]);
        }
    }
    rep.fitted["g_over_G[" + mtag + "]"] = Json{{"min", io::number(ratio_min)}, {"max", io::number(ratio_max)}};
    rep.check("g_over_G_finite[" + mtag + "]", "finite", ratio_max, 0.0);

    for (const auto& pr : pairs) {
      const ConditionKind kinds[2] = {ConditionKind::Weighted, ConditionKind::WeightedLog};
      for (const ConditionKind kind : kinds) {
        if (pr.weak && kind == ConditionKind::WeightedLog) continue;
        const ConditionReport cr =
            condition_eval(pr.phi_cond, pr.phi_cond, &pr.w, pr.p, kind, kind == ConditionKind::WeightedLog ? 1 : 0,
                           pts);
        const std::string key = "condition_" + condition_name(kind) + "[" + pr.name + "," + mtag + "]";
        rep.extra[key] = io::to_json(cr, res.family.id(), n);
        rep.check(key + "_holds", "eq", cr.verdict == "holds" ? 1.0 : 0.0, 1.0, 0.0);
      }
      for (const auto& op : names) {
        if (pr.weak && op != "G" && op != "g_star") continue;
        const double scale = op == "comm_G_log" ? bmo : 1.0;
        const double scale_big = op == "comm_G_log" ? bmo_big : 1.0;
        double proxy = 0.0, proxy_big = 0.0, zero = 0.0;
        for (std::size_t fi = 0; fi < res.corpus.size(); ++fi) {
          const auto& f = res.corpus[fi].field;
          const double base = morrey_norm(f, pr.w, pr.p, pr.phi, res.family).value;
          const double base_big = morrey_norm(f, pr.w, pr.p, pr.phi, big).value;
          const auto& out = ops[op][fi];
          if (base > 0.0) proxy = std::max(proxy, morrey_norm(out, pr.w, pr.p, pr.phi, res.family, pr.weak).value /
                                                      (scale * base));
          if (base_big > 0.0)
            proxy_big =
                std::max(proxy_big, morrey_norm(out, pr.w, pr.p, pr.phi, big, pr.weak).value / (scale_big * base_big));
        }
        if (level == 1) {
          const GridFunctiond z = GridFunctiond::zero(g);
          GridFunctiond oz = z;
          if (op == "G") oz = g_sq_field(z, bank).field;
          else if (op == "g") oz = g_vertical_field(z, bank).field;
          else if (op == "g_star") oz = g_star_field(z, bank, lambda).field;
          else oz = comm_g_sq_field(z, bank, b, 1).field;
          zero = morrey_norm(oz, pr.w, pr.p, pr.phi, res.family, pr.weak).value;
          rep.check("zero_field[" + pr.name + "," + op + "]", "eq", zero, 0.0, 0.0);
        }
        const std::string key = pr.name + "," + op;
        rep.check("proxy_finite[" + key + "," + mtag + "]", "finite", proxy, 0.0);
        rep.fitted["proxy[" + key + "," + mtag + "]"] = io::number(proxy);
        rep.fitted["proxy_enlarged[" + key + "," + mtag + "]"] = io::number(proxy_big);
        rep.check("family_drift[" + key + "," + mtag + "]", "lt", drift(proxy_big, proxy), family_drift);
        trend[key][std::size_t(level)] = proxy;
      }
    }
  }
  for (const auto& [key, v] : trend)
    rep.refinement["proxy[" + key + "]"] =
        Json{{"m_coarse", ms[0]}, {"m_fine", ms[1]}, {"coarse", v[0]}, {"fine", v[1]}, {"drift", drift(v[1], v[0])}};
  return rep;
}

}  // namespace sqfn::harness
