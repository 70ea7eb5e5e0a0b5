#include "sqfn/harness.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sqfn::harness {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw Error("config: unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw Error("config: top level must be an object");
  reject_unknown(j, {"schema", "seed", "output", "grid", "weight", "kernel", "scales", "family", "experiments"},
                 "config");
  ExperimentConfig cfg;
  try {
    read(j, "schema", cfg.schema);
    read(j, "seed", cfg.seed);
    read(j, "output", cfg.output);
    if (j.contains("grid")) {
      const Json& g = j.at("grid");
      reject_unknown(g, {"dim", "half_width", "points"}, "grid");
      read(g, "dim", cfg.grid.dim);
      read(g, "half_width", cfg.grid.half_width);
      read(g, "points", cfg.grid.points);
    }
    if (j.contains("weight")) {
      const Json& w = j.at("weight");
      reject_unknown(w, {"kind", "gamma", "c"}, "weight");
      read(w, "kind", cfg.weight.kind);
      if (cfg.weight.kind == "constant") {
        cfg.weight.parameter = 1.0;
        read(w, "c", cfg.weight.parameter);
      } else {
        read(w, "gamma", cfg.weight.parameter);
      }
    }
    if (j.contains("kernel")) {
      const Json& k = j.at("kernel");
      reject_unknown(k, {"alpha", "size"}, "kernel");
      read(k, "alpha", cfg.kernel.alpha);
      read(k, "size", cfg.kernel.size);
    }
    if (j.contains("scales")) {
      reject_unknown(j.at("scales"), {"per_octave"}, "scales");
      read(j.at("scales"), "per_octave", cfg.per_octave);
    }
    if (j.contains("family")) {
      const Json& f = j.at("family");
      reject_unknown(f, {"centers", "center_extent", "radii", "r_min", "r_max"}, "family");
      read(f, "centers", cfg.family.centers);
      read(f, "center_extent", cfg.family.center_extent);
      read(f, "radii", cfg.family.radii);
      read(f, "r_min", cfg.family.r_min);
      read(f, "r_max", cfg.family.r_max);
    }
    if (j.contains("experiments")) {
      for (const Json& e : j.at("experiments")) {
        ExperimentSpec spec;
        if (e.is_string()) {
          spec.name = e.get<std::string>();
        } else {
          reject_unknown(e, {"name", "params"}, "experiment");
          spec.name = e.at("name").get<std::string>();
          if (e.contains("params")) spec.params = e.at("params");
          if (!spec.params.is_object()) throw Error("config: params of '" + spec.name + "' must be an object");
        }
        cfg.experiments.push_back(std::move(spec));
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(std::string("config: ") + ex.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path);
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& ex) {
    throw Error("config: parse error in " + path + ": " + ex.what());
  }
  return parse_config(j);
}

Json to_json(const ExperimentConfig& cfg) {
  Json weight{{"kind", cfg.weight.kind}};
  weight[cfg.weight.kind == "constant" ? "c" : "gamma"] = cfg.weight.parameter;
  Json exps = Json::array();
  for (const auto& e : cfg.experiments) exps.push_back(Json{{"name", e.name}, {"params", e.params}});
  return Json{{"schema", cfg.schema},
              {"seed", cfg.seed},
              {"output", cfg.output},
              {"grid", {{"dim", cfg.grid.dim}, {"half_width", cfg.grid.half_width}, {"points", cfg.grid.points}}},
              {"weight", weight},
              {"kernel", {{"alpha", cfg.kernel.alpha}, {"size", cfg.kernel.size}}},
              {"scales", {{"per_octave", cfg.per_octave}}},
              {"family",
               {{"centers", cfg.family.centers},
                {"center_extent", cfg.family.center_extent},
                {"radii", cfg.family.radii},
                {"r_min", cfg.family.r_min},
                {"r_max", cfg.family.r_max}}},
              {"experiments", exps}};
}

namespace {

double param(const Json& p, const char* key, double fallback) {
  return p.contains(key) ? p.at(key).get<double>() : fallback;
}

void check_lambda(const ExperimentConfig& cfg, const std::string& exp, double lambda, double alpha,
                  Validation& v) {
  const double bound = 3.0 + alpha / cfg.grid.dim;
  std::ostringstream os;
  os << exp << ": lambda = " << lambda << " against 3 + alpha/n = " << bound;
  if (lambda < bound * (1.0 - 1e-12)) v.errors.push_back(os.str() + " (need lambda > 3 + alpha/n)");
  else if (lambda <= bound * (1.0 + 1e-12)) v.flags.push_back(os.str() + " (boundary case, run as a probe)");
}

}  // namespace

Validation validate(const ExperimentConfig& cfg) {
  Validation v;
  auto err = [&](const std::string& s) { v.errors.push_back(s); };
  if (cfg.schema != kConfigSchema) err("schema must be " + std::string(kConfigSchema));
  if (cfg.grid.dim != 1 && cfg.grid.dim != 2) err("grid.dim must be 1 or 2");
  if (!(cfg.grid.half_width > 0.0)) err("grid.half_width must be positive");
  if (cfg.grid.points < 17 || cfg.grid.points % 4 != 1)
    err("grid.points must be >= 17 and of the form 4q + 1 (so the coarse pair grid stays odd)");
  if (cfg.weight.kind != "power" && cfg.weight.kind != "constant") err("weight.kind must be power or constant");
  if (cfg.weight.kind == "power" && !(cfg.weight.parameter > -cfg.grid.dim))
    err("weight.gamma must exceed -n");
  if (cfg.weight.kind == "constant" && !(cfg.weight.parameter > 0.0)) err("weight.c must be positive");
  if (!(cfg.kernel.alpha > 0.0 && cfg.kernel.alpha <= 1.0)) err("kernel.alpha must lie in (0, 1]");
  if (cfg.kernel.size < 4) err("kernel.size must be at least 4");
  if (cfg.per_octave < 1) err("scales.per_octave must be positive");
  const double h_coarse = 2.0 * cfg.grid.half_width / ((cfg.grid.points + 1) / 2 - 1);
  const FamilySpec& f = cfg.family;
  if (f.centers < 1 || f.radii < 2) err("family needs >= 1 center and >= 2 radii");
  if (!(f.r_min >= h_coarse * (1.0 - 1e-12))) err("family.r_min must be >= the coarse grid spacing");
  if (!(f.r_max > f.r_min)) err("family.r_max must exceed r_min");
  if (f.center_extent < 0.0 || f.center_extent + f.r_max > cfg.grid.half_width * (1.0 + 1e-12))
    err("family balls must lie inside the box (center_extent + r_max <= half_width)");
  if (2.0 * f.r_max >= 2.0 * cfg.grid.half_width) err("family.r_max must leave room for the tail integral");

  for (const auto& e : cfg.experiments) {
    if (!find_experiment(e.name)) {
      err("unknown experiment '" + e.name + "'");
      continue;
    }
    const Json& p = e.params;
    const double pp = param(p, "p", 2.0);
    if (!(pp >= 1.0)) err(e.name + ": p must be >= 1");
    if (p.contains("alphas"))
      for (const Json& a : p.at("alphas"))
        if (!(a.get<double>() > 0.0 && a.get<double>() <= 1.0)) err(e.name + ": alphas must lie in (0, 1]");
    if (p.contains("betas"))
      for (const Json& b : p.at("betas"))
        if (!(b.get<double>() >= 1.0)) err(e.name + ": betas must be >= 1");
    if (p.contains("korders"))
      for (const Json& k : p.at("korders"))
        if (k.get<int>() < 1 || k.get<int>() > 3) err(e.name + ": korders must lie in {1, 2, 3}");
    if (p.contains("kappa") && !(param(p, "kappa", 0.5) >= 0.0 && param(p, "kappa", 0.5) < 1.0))
      err(e.name + ": kappa must lie in [0, 1)");
    if (p.contains("weak_p") && param(p, "weak_p", 1.0) != 1.0)
      err(e.name + ": weak-type experiments are restricted to p = 1");
    if (e.name == "ball_estimate_gstar" || e.name == "morrey_boundedness")
      check_lambda(cfg, e.name, param(p, "lambda", 4.0), cfg.kernel.alpha, v);
  }
  return v;
}

}  // namespace sqfn::harness
