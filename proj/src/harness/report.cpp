#include "sqfn/harness.hpp"
#include "sqfn/kernels.hpp"

#include <cmath>
#include <random>

namespace sqfn::harness {

bool evaluate_relation(const std::string& relation, double lhs, double rhs, double tolerance) {
  if (relation == "finite") return std::isfinite(lhs);
  if (std::isnan(lhs) || std::isnan(rhs)) return false;
  if (relation == "le") return (lhs == 0.0 && rhs == 0.0) || lhs <= rhs * (1.0 + tolerance);
  if (relation == "lt") return lhs < rhs;
  if (relation == "ge") return lhs >= rhs * (1.0 - tolerance);
  if (relation == "eq") return lhs == rhs || std::abs(lhs - rhs) <= tolerance * std::max(std::abs(lhs), std::abs(rhs));
  throw Error("unknown relation '" + relation + "'");
}

CheckRecord CheckRecord::make(std::string name, std::string relation, double lhs, double rhs, double tolerance) {
  CheckRecord c;
  c.name = std::move(name);
  c.relation = std::move(relation);
  c.lhs = lhs;
  c.rhs = rhs;
  c.tolerance = tolerance;
  if (c.relation == "finite") c.ratio = lhs;
  else if (rhs != 0.0) c.ratio = lhs / rhs;
  else c.ratio = lhs == 0.0 ? 0.0 : INFINITY;
  c.pass = evaluate_relation(c.relation, lhs, rhs, tolerance);
  const bool vacuous = c.relation == "le" && lhs == 0.0 && rhs == 0.0;
  c.verdict = c.pass ? (vacuous ? "pass_vacuous" : "pass") : "fail";
  return c;
}

Json to_json(const CheckRecord& c) {
  return Json{{"name", c.name},
              {"relation", c.relation},
              {"lhs", io::number(c.lhs)},
              {"rhs", io::number(c.rhs)},
              {"tolerance", io::number(c.tolerance)},
              {"ratio", io::number(c.ratio)},
              {"verdict", c.verdict}};
}

bool ExperimentReport::passed() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

Json to_json(const ExperimentReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  Json plots = Json::array();
  for (const auto& [stem, table] : r.plots) plots.push_back(stem + ".csv");
  Json out{{"name", r.name},
           {"params", r.params},
           {"passed", r.passed()},
           {"checks", checks},
           {"fitted", r.fitted},
           {"refinement", r.refinement}};
  if (!r.flags.empty()) out["flags"] = r.flags;
  if (!r.extra.empty()) out["details"] = r.extra;
  out["plots"] = plots;
  return out;
}

std::vector<CorpusField> make_corpus(const Grid& g, std::uint64_t seed) {
  using K = TestKernel<double>;
  const Point e1 = point(1.0, 0.0);
  const double L = g.half_width();
  auto bump = sample(g, [](const Point& x) { return K::unit_bump(x); });
  auto offset = sample(g, [&](const Point& x) { return K::unit_bump((x - 1.5 * e1) / 0.75); });
  auto indicator = sample(g, [&](const Point& x) {
    return within_radius((x + 0.5 * e1).squaredNorm(), 1.0, true) ? 1.0 : 0.0;
  });
  auto narrow = sample(g, [&](const Point& x) { return K::unit_bump((x + 1.5 * e1) / 0.5); });

  std::mt19937_64 rng(seed ^ 0x636F72707573ull);
  struct Wave {
    double a, k0, k1, phase;
  };
  std::vector<Wave> waves;
  for (int k = 1; k <= 8; ++k) {
    const double a = detail::uniform(rng, -1.0, 1.0) / k;
    const double k1 = g.dim() == 2 ? std::floor(detail::uniform(rng, -k, k + 1)) : 0.0;
    waves.push_back({a, double(k), k1, detail::uniform(rng, 0.0, 2.0 * M_PI)});
  }
  auto band = sample(g, [&](const Point& x) {
    double s = 0.0;
    for (const auto& w : waves) s += w.a * std::cos(M_PI * (w.k0 * x[0] + w.k1 * x[1]) / L + w.phase);
    return s * K::unit_bump(x / (0.75 * L));
  });

  std::vector<CorpusField> out;
  auto scalar = [](const GridFunctiond& f) { return VecGridFunction<double>({f}); };
  out.push_back({"bump", scalar(bump)});
  out.push_back({"offset_bump", scalar(offset)});
  out.push_back({"indicator", scalar(indicator)});
  out.push_back({"band_limited", scalar(band)});
  out.push_back({"vec2", VecGridFunction<double>({bump, offset})});
  out.push_back({"vec5", VecGridFunction<double>({bump, offset, indicator, band, narrow})});
  return out;
}

}  // namespace sqfn::harness
