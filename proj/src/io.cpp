#include "sqfn/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sqfn::io {

Json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double to_double(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw Error("to_double: not a number: " + j.dump());
}

Json to_json(const Point& p, int dim) {
  Json a = Json::array();
  for (int k = 0; k < dim; ++k) a.push_back(number(p[k]));
  return a;
}

Json to_json(const Ball& b, int dim) {
  return Json{{"center", to_json(b.center, dim)}, {"radius", number(b.radius)}};
}

Json to_json(const Grid& g) {
  return Json{{"dim", g.dim()},
              {"half_width", g.half_width()},
              {"points_per_axis", g.points_per_axis()},
              {"spacing", g.spacing()}};
}

Json to_json(const AdmissibilityReport& r) {
  return Json{{"support_ok", r.support_ok},
              {"mean_ok", r.mean_ok},
              {"holder_ok", r.holder_ok},
              {"degenerate", r.degenerate},
              {"support_leak", number(r.support_leak)},
              {"mean_residual", number(r.mean_residual)},
              {"max_abs", number(r.max_abs)},
              {"holder_seminorm", number(r.holder_seminorm)},
              {"passes", r.passes()}};
}

Json to_json(const SquareFunctionDiagnostics& d) {
  return Json{{"op", d.op},
              {"dictionary_id", d.dictionary_id},
              {"t_min", number(d.t_min)},
              {"t_max", number(d.t_max)},
              {"scales", d.scales},
              {"truncation_mass", number(d.truncation_mass)},
              {"edge_mass", number(d.edge_mass)}};
}

Json to_json(const WeightDiagnostics& d) {
  return Json{{"kind", d.kind},
              {"parameter", number(d.parameter)},
              {"p", number(d.p)},
              {"ap_estimate", number(d.ap_estimate)},
              {"doubling", number(d.doubling)},
              {"delta", number(d.delta)},
              {"delta_constant", number(d.delta_constant)},
              {"family_id", d.family_id}};
}

Json to_json(const ReverseDoublingFit& f) {
  return Json{{"delta", number(f.delta)},
              {"constant", number(f.constant)},
              {"fit_pairs", f.fit_pairs},
              {"holdout_pairs", f.holdout_pairs},
              {"holdout_worst", number(f.holdout_worst)},
              {"holds", f.holds}};
}

Json to_json(const LogPairReport& r) {
  return Json{{"bmo", number(r.bmo)},
              {"fitted_constant", number(r.fitted_constant)},
              {"fitted_constant_dual", number(r.fitted_constant_dual)},
              {"pairs", r.pairs},
              {"k", r.korder},
              {"p", number(r.p)},
              {"family_id", r.family_id}};
}

Json to_json(const JohnNirenbergReport& r) {
  Json beta = Json::array(), dist = Json::array();
  for (double b : r.beta) beta.push_back(number(b));
  for (double d : r.distribution) dist.push_back(number(d));
  return Json{{"bmo", number(r.bmo)},     {"C1", number(r.C1)},   {"C2", number(r.C2)},
              {"rmse", number(r.rmse)},   {"fitted_points", r.fitted_points},
              {"beta", beta},             {"distribution", dist}};
}

Json to_json(const OscillationEquivalence& r) {
  Json p = Json::array(), sup = Json::array(), ratio = Json::array();
  for (double v : r.p) p.push_back(number(v));
  for (double v : r.sup) sup.push_back(number(v));
  for (double v : r.ratio) ratio.push_back(number(v));
  return Json{{"p", p}, {"sup", sup}, {"ratio", ratio}, {"family_id", r.family_id}};
}

Json to_json(const HardyBoundReport& r) {
  return Json{{"lhs_sup", number(r.lhs_sup)},   {"rhs_sup", number(r.rhs_sup)},
              {"A_or_A1", number(r.constant)},  {"ratio", number(r.ratio)},
              {"monotone", r.monotone},         {"violation", number(r.violation)},
              {"claim_checked", r.claim_checked}, {"k", r.korder}};
}

Json to_json(const ConditionReport& r, const std::string& family_id, int dim) {
  return Json{{"kind", condition_name(r.kind)},
              {"k", r.korder},
              {"p", number(r.p)},
              {"phi1", r.phi1},
              {"phi2", r.phi2},
              {"weight", r.weight},
              {"family_id", family_id},
              {"C_min", number(r.c_min)},
              {"C_half", number(r.c_half)},
              {"growth", number(r.growth)},
              {"tail_drift", number(r.tail_drift)},
              {"verdict", r.verdict},
              {"argmax", to_json(r.argmax, dim)},
              {"points", r.points},
              {"t_max", number(r.t_max)},
              {"per_octave", r.per_octave},
              {"ess", r.ess}};
}

Json to_json(const TailIntegral& t) {
  return Json{{"value", number(t.value)},
              {"converged", t.converged},
              {"horizon", number(t.horizon)},
              {"doublings", t.doublings}};
}

Json norm_report(const std::string& norm_kind, double p, const PhiFunction& phi, const NormValue& v,
                 int dim) {
  return Json{{"norm_kind", norm_kind},
              {"p", number(p)},
              {"phi_kind", phi.kind_name()},
              {"phi", phi.describe()},
              {"family_id", v.family_id},
              {"value", number(v.value)},
              {"argmax_ball", to_json(v.argmax, dim)}};
}

Json kernel_certificate(const KernelDictionary<double>& dict) {
  Json kernels = Json::array();
  for (const auto& k : dict.kernels)
    kernels.push_back(Json{{"label", k.label()}, {"admissibility", to_json(k.verify())}});
  return Json{{"dictionary_id", dict.id()},
              {"dim", dict.dim},
              {"alpha", number(dict.alpha)},
              {"seed", dict.seed},
              {"reference_points", dict.kernels.empty() ? 0 : dict.kernels.front().reference_points()},
              {"kernels", kernels}};
}

std::string to_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  char buf[64];
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
  return os.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed for " + path);
}

void write_csv(const std::string& path, const Table& t) { write_text(path, to_csv(t)); }

Table field_table(const GridFunctiond& f, const std::string& name) {
  Table t;
  const Grid& g = f.grid();
  t.header = g.dim() == 1 ? std::vector<std::string>{"x", name} : std::vector<std::string>{"x", "y", name};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.node(i);
    if (g.dim() == 1) t.rows.push_back({p[0], f[i]});
    else t.rows.push_back({p[0], p[1], f[i]});
  }
  return t;
}

Table kernel_table(const TestKernel<double>& k) {
  Table t;
  t.header = k.dim() == 1 ? std::vector<std::string>{"u", "phi"} : std::vector<std::string>{"u0", "u1", "phi"};
  for (std::size_t i = 0; i < k.reference_size(); ++i) {
    const Point u = k.reference_node(i);
    const double v = k.values()[Eigen::Index(i)];
    if (k.dim() == 1) t.rows.push_back({u[0], v});
    else t.rows.push_back({u[0], u[1], v});
  }
  return t;
}

}  // namespace sqfn::io
