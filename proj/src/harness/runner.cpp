#include "experiments.hpp"
#include "sqfn/io.hpp"

#include <chrono>
#include <filesystem>

namespace sqfn::harness {

const std::vector<ExperimentInfo>& registry() {
  static const std::vector<ExperimentInfo> r{
      {"annihilation", "G, g and g* kill constants; commutators with a constant symbol vanish", exp_annihilation},
      {"aperture_domination", "G_beta <= beta^(3n/2+alpha) G pointwise", exp_aperture_domination},
      {"ball_estimate_G", "local ball estimate for G, strong and weak type", exp_ball_estimate_G},
      {"ball_estimate_gstar", "aperture decomposition and ball estimate for g*_lambda", exp_ball_estimate_gstar},
      {"ball_estimate_commutator", "ball estimate for [b,G]^k with logarithmic tails", exp_ball_estimate_commutator},
      {"morrey_boundedness", "generalized weighted Morrey norm ratios of the operators", exp_morrey_boundedness},
      {"space_foundations", "weak/strong monotonicity, collapse identities, BMO probes, weight membership",
       exp_space_foundations},
      {"hardy_operators", "Hardy-type bounds for nonincreasing profiles", exp_hardy_operators},
      {"pair_conditions", "integral conditions on (phi1, phi2) and the reverse-doubling chain", exp_pair_conditions},
  };
  return r;
}

const ExperimentInfo* find_experiment(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return &e;
  return nullptr;
}

RunResult run(const ExperimentConfig& cfg) {
  const Validation v = validate(cfg);
  if (!v.ok()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : v.errors) msg += "\n  " + e;
    throw Error(msg);
  }
  RunResult res;
  Json exps = Json::array();
  for (const auto& spec : cfg.experiments) {
    const ExperimentInfo* info = find_experiment(spec.name);
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentReport rep = info->run(cfg, spec.params);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.seconds.emplace_back(spec.name, secs);
    res.passed = res.passed && rep.passed();
    exps.push_back(to_json(rep));
    res.experiments.push_back(std::move(rep));
  }
  res.report = Json{{"schema", kReportSchema},
                    {"corpus", {{"version", kCorpusVersion}, {"label", "constructed fields, not measured data"}}},
                    {"config", to_json(cfg)},
                    {"validation_flags", v.flags},
                    {"experiments", exps},
                    {"passed", res.passed}};
  return res;
}

std::string serialize(const Json& report) { return report.dump(2) + "\n"; }

void write_outputs(const ExperimentConfig& cfg, const RunResult& result) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  io::write_text((dir / "report.json").string(), serialize(result.report));
  Json timing = Json::object();
  for (const auto& [name, secs] : result.seconds) timing[name] = secs;
  io::write_text((dir / "timing.json").string(), timing.dump(2) + "\n");
  for (const auto& rep : result.experiments)
    for (const auto& [stem, table] : rep.plots) io::write_csv((dir / (stem + ".csv")).string(), table);
}

}  // namespace sqfn::harness
