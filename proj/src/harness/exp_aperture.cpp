#include "common.hpp"
#include "experiments.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace sqfn::harness {

namespace {

std::string tag(double alpha, double beta, int m) {
  std::ostringstream os;
  os << "alpha=" << alpha << ",beta=" << beta << ",m=" << m;
  return os.str();
}

}  // namespace

ExperimentReport exp_aperture_domination(const ExperimentConfig& cfg, const Json& params) {
  ExperimentReport rep;
  rep.name = "aperture_domination";
  const auto alphas = pvec(params, "alphas", {0.5, 1.0});
  const auto betas = pvec(params, "betas", {2.0, 4.0});
  const double eps_max = pget(params, "epsilon", 0.05);
  rep.params = Json{{"alphas", alphas}, {"betas", betas}, {"epsilon", eps_max}};
  const int n = cfg.grid.dim;
  const int ms[2] = {coarse_points(cfg), fine_points(cfg)};

  // eps[alpha][beta][resolution]
  std::vector<std::vector<std::array<double, 2>>> eps(alphas.size(), std::vector<std::array<double, 2>>(betas.size()));
  for (int level = 0; level < 2; ++level) {
    const Resolution res = make_resolution(cfg, ms[level]);
    const Grid& g = res.grid;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      const auto dict = make_dict(cfg, alphas[a]);
      const StencilBank<double> bank(g, dict, res.scales);
      std::vector<double> worst(betas.size(), 0.0);
      std::vector<std::string> worst_field(betas.size());
      bool beta_one_exact = true;
      for (const auto& cf : res.corpus) {
        const auto tables = alpha_tables(cf.field, bank);
        const auto s1 = cone_sq(tables, 1.0, false);
        for (std::size_t b = 0; b < betas.size(); ++b) {
          const auto sb = cone_sq(tables, betas[b], false);
          for (std::size_t i = 0; i < g.size(); ++i) {
            double r = 0.0;
            if (s1[i] > 0.0) r = std::sqrt(sb[i]) / std::sqrt(s1[i]);
            else if (sb[i] > 0.0) r = INFINITY;
            if (r > worst[b]) {
              worst[b] = r;
              worst_field[b] = cf.name;
            }
          }
          if (level == 1 && cf.name == "bump" && alphas[a] == alphas.back()) {
            io::Table& t = rep.plots["aperture_ratio_bump"];
            if (t.header.empty()) {
              t.header = {n == 1 ? "x" : "node"};
              for (std::size_t i = 0; i < g.size(); ++i) t.rows.push_back({n == 1 ? g.node(i)[0] : double(i)});
            }
            std::ostringstream h;
            h << "ratio_beta_" << betas[b];
            t.header.push_back(h.str());
            for (std::size_t i = 0; i < g.size(); ++i)
              t.rows[i].push_back(s1[i] > 0.0 ? std::sqrt(sb[i]) / std::sqrt(s1[i]) : 0.0);
          }
        }
        // beta = 1 through the aperture path against the plain operator.
        if (cf.field.components() == 1) {
          const auto G = g_sq_field(cf.field[0], bank).field;
          const auto s = cone_square_sums(tables[0], 1.0, false);
          for (std::size_t i = 0; i < g.size(); ++i)
            if (std::sqrt(s[i]) != G[i]) beta_one_exact = false;
        }
      }
      for (std::size_t b = 0; b < betas.size(); ++b) {
        const double bound = std::pow(betas[b], 1.5 * n + alphas[a]);
        const std::string t = tag(alphas[a], betas[b], ms[level]);
        rep.check("aperture[" + t + "]", "le", worst[b], bound, eps_max);
        eps[a][b][std::size_t(level)] = std::max(0.0, worst[b] / bound - 1.0);
        rep.fitted["worst_ratio[" + t + "]"] = io::number(worst[b]);
        rep.fitted["worst_field[" + t + "]"] = worst_field[b];
        rep.fitted["bound[" + t + "]"] = io::number(bound);
      }
      std::ostringstream t1;
      t1 << "alpha=" << alphas[a] << ",m=" << ms[level];
      rep.check("beta_one_equals_G[" + t1.str() + "]", "eq", beta_one_exact ? 1.0 : 0.0, 1.0, 0.0);
      if (level == 1 && a == 0) {
        const auto zero = GridFunctiond::zero(g);
        const auto G1 = g_sq_field(zero, bank, 1.0).field;
        const auto G2 = g_sq_field(zero, bank, betas.front()).field;
        rep.check("zero_field_ratio", "le", G2.max_abs(), G1.max_abs(), 0.0);
      }
    }
  }
  for (std::size_t a = 0; a < alphas.size(); ++a)
    for (std::size_t b = 0; b < betas.size(); ++b) {
      std::ostringstream t;
      t << "alpha=" << alphas[a] << ",beta=" << betas[b];
      rep.check("epsilon_nonincreasing[" + t.str() + "]", "le", eps[a][b][1], eps[a][b][0], 0.0);
      rep.refinement["epsilon[" + t.str() + "]"] =
          Json{{"m_coarse", ms[0]}, {"m_fine", ms[1]}, {"coarse", eps[a][b][0]}, {"fine", eps[a][b][1]}};
    }
  return rep;
}

}  // namespace sqfn::harness
