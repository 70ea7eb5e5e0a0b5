#include "doctest.h"

#include "sqfn/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sqfn;
using namespace sqfn::harness;

namespace {

ExperimentConfig small_config(std::vector<std::string> names) {
  Json j{{"schema", kConfigSchema},
         {"grid", {{"dim", 1}, {"half_width", 4.0}, {"points", 33}}},
         {"family", {{"centers", 3}, {"center_extent", 1.0}, {"radii", 3}, {"r_min", 0.5}, {"r_max", 3.0}}},
         {"experiments", names}};
  return parse_config(j);
}

bool has_message(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("check relations") {
  CHECK(evaluate_relation("le", 1.0, 1.0, 0.0));
  CHECK(evaluate_relation("le", 1.05, 1.0, 0.05));
  CHECK_FALSE(evaluate_relation("le", 1.06, 1.0, 0.05));
  CHECK(evaluate_relation("lt", 0.9, 1.0, 0.0));
  CHECK_FALSE(evaluate_relation("lt", 1.0, 1.0, 0.5));
  CHECK(evaluate_relation("ge", 0.95, 1.0, 0.05));
  CHECK_FALSE(evaluate_relation("ge", 0.9, 1.0, 0.05));
  CHECK(evaluate_relation("eq", 1.0 + 1e-13, 1.0, 1e-12));
  CHECK_FALSE(evaluate_relation("eq", 1.0 + 1e-11, 1.0, 1e-12));
  CHECK(evaluate_relation("finite", 3.0, 0.0, 0.0));
  CHECK_FALSE(evaluate_relation("finite", INFINITY, 0.0, 0.0));
  CHECK_FALSE(evaluate_relation("le", NAN, 1.0, 0.0));
  CHECK_THROWS_AS(evaluate_relation("approx", 1.0, 1.0, 0.0), Error);

  const CheckRecord z = CheckRecord::make("z", "le", 0.0, 0.0, 0.0);
  CHECK(z.pass);
  CHECK(z.verdict == "pass_vacuous");
  const CheckRecord f = CheckRecord::make("f", "le", 2.0, 1.0, 0.0);
  CHECK(f.verdict == "fail");
  CHECK(f.ratio == 2.0);
  ExperimentReport rep;
  rep.check("a", "le", 1.0, 2.0);
  CHECK(rep.passed());
  rep.check("b", "lt", 2.0, 1.0);
  CHECK_FALSE(rep.passed());
}

TEST_CASE("config parsing") {
  CHECK_THROWS_AS(parse_config(Json{{"schema", kConfigSchema}, {"grdi", Json::object()}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"grid", {{"dim", 1}, {"spacing", 0.1}}}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"experiments", {{{"name", "annihilation"}, {"params", 3}}}}}), Error);
  const ExperimentConfig d = parse_config(Json::object());
  CHECK(d.grid.points == 129);
  CHECK(d.grid.half_width == 4.0);
  CHECK(d.kernel.size == 6);
  CHECK(d.family.centers == 9);
  CHECK(d.family.radii == 8);

  ExperimentConfig cfg = small_config({"annihilation", "hardy_operators"});
  cfg.experiments[1].params = Json{{"per_octave", 8}};
  const ExperimentConfig back = parse_config(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.experiments.size() == 2);
  CHECK(back.experiments[1].params.at("per_octave") == 8);
}

TEST_CASE("config validation") {
  CHECK(validate(small_config({"annihilation"})).ok());

  ExperimentConfig low = small_config({});
  low.experiments.push_back({"ball_estimate_gstar", Json{{"lambda", 3.5}}});
  const Validation vl = validate(low);
  CHECK_FALSE(vl.ok());
  CHECK(has_message(vl.errors, "need lambda > 3 + alpha/n"));

  ExperimentConfig edge = small_config({});
  edge.experiments.push_back({"morrey_boundedness", Json{{"lambda", 4.0}}});
  const Validation ve = validate(edge);
  CHECK(ve.ok());
  CHECK(has_message(ve.flags, "boundary case"));

  ExperimentConfig half = small_config({});
  half.kernel.alpha = 0.5;
  half.experiments.push_back({"morrey_boundedness", Json{{"lambda", 3.6}}});
  CHECK(validate(half).ok());

  CHECK(has_message(validate(small_config({"no_such"})).errors, "unknown experiment"));
  ExperimentConfig bad = small_config({});
  bad.grid.points = 35;
  CHECK_FALSE(validate(bad).ok());
  bad = small_config({});
  bad.family.r_max = 3.5;
  CHECK_FALSE(validate(bad).ok());
  bad = small_config({});
  bad.experiments.push_back({"morrey_boundedness", Json{{"weak_p", 2.0}}});
  CHECK(has_message(validate(bad).errors, "restricted to p = 1"));
  CHECK_THROWS_AS(run(low), Error);
}

TEST_CASE("registry") {
  const auto& r = registry();
  CHECK(r.size() == 9);
  for (const char* name : {"annihilation", "aperture_domination", "ball_estimate_G", "ball_estimate_gstar",
                           "ball_estimate_commutator", "morrey_boundedness", "space_foundations", "hardy_operators",
                           "pair_conditions"})
    CHECK(find_experiment(name) != nullptr);
  CHECK(find_experiment("nope") == nullptr);
}

TEST_CASE("corpus is fixed and seeded") {
  const Grid g(1, 4.0, 65);
  const auto a = make_corpus(g, 7);
  const auto b = make_corpus(g, 7);
  const auto c = make_corpus(g, 8);
  REQUIRE(a.size() == 6);
  const std::vector<std::string> names{"bump", "offset_bump", "indicator", "band_limited", "vec2", "vec5"};
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == names[i]);
    for (std::size_t k = 0; k < a[i].field.components(); ++k)
      CHECK((a[i].field[k].values() == b[i].field[k].values()).all());
  }
  CHECK(a[4].field.components() == 2);
  CHECK(a[5].field.components() == 5);
  CHECK((a[0].field[0].values() == c[0].field[0].values()).all());
  CHECK_FALSE((a[3].field[0].values() == c[3].field[0].values()).all());
}

TEST_CASE("empty experiment list") {
  const RunResult r = run(small_config({}));
  CHECK(r.passed);
  CHECK(r.report.at("experiments").empty());
  CHECK(r.report.at("schema") == kReportSchema);
  CHECK(r.report.at("corpus").at("version") == kCorpusVersion);
}

TEST_CASE("reports are deterministic and carry no timings") {
  ExperimentConfig cfg = small_config({"annihilation", "hardy_operators", "pair_conditions"});
  const RunResult a = run(cfg);
  const RunResult b = run(cfg);
  CHECK(serialize(a.report) == serialize(b.report));
  CHECK(a.passed);
  CHECK(serialize(a.report).find("seconds") == std::string::npos);

  const auto dir = std::filesystem::temp_directory_path() / "sqfn_harness_test";
  std::filesystem::remove_all(dir);
  cfg.output = dir.string();
  write_outputs(cfg, a);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "timing.json"));
  std::ifstream in(dir / "report.json");
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == serialize(a.report));
  std::filesystem::remove_all(dir);
}
