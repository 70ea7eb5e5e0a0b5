#include "sqfn/harness.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace sqfn;

namespace {

void print_summary(const harness::RunResult& r) {
  for (const auto& e : r.experiments) {
    std::size_t failed = 0;
    for (const auto& c : e.checks) failed += !c.pass;
    std::cout << (e.passed() ? "PASS " : "FAIL ") << e.name << " (" << e.checks.size() - failed << "/"
              << e.checks.size() << " checks)\n";
    for (const auto& c : e.checks)
      if (!c.pass) std::cout << "    failed: " << c.name << " lhs=" << c.lhs << " rhs=" << c.rhs << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sqfn-lab: numerical experiments for square functions on weighted Morrey-type spaces"};
  app.require_subcommand(1);
  std::string config;
  std::string output;

  auto* run = app.add_subcommand("run", "run the experiments listed in a config");
  run->add_option("config", config, "config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "output directory (overrides the config)");
  auto* val = app.add_subcommand("validate", "validate a config without running it");
  val->add_option("config", config, "config JSON")->required()->check(CLI::ExistingFile);
  auto* list = app.add_subcommand("list", "list the registered experiments");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& e : harness::registry()) std::cout << e.name << "\t" << e.summary << "\n";
      return 0;
    }
    harness::ExperimentConfig cfg = harness::load_config(config);
    if (val->parsed()) {
      const harness::Validation v = harness::validate(cfg);
      for (const auto& f : v.flags) std::cout << "flag: " << f << "\n";
      for (const auto& e : v.errors) std::cerr << "error: " << e << "\n";
      if (v.ok()) std::cout << "config ok (" << cfg.experiments.size() << " experiments)\n";
      return v.ok() ? 0 : 2;
    }
    if (!output.empty()) cfg.output = output;
    const harness::RunResult r = harness::run(cfg);
    harness::write_outputs(cfg, r);
    print_summary(r);
    std::cout << (r.passed ? "all checks passed" : "some checks failed") << "; report in " << cfg.output << "\n";
    return r.passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "sqfn-lab: " << e.what() << "\n";
    return 2;
  }
}
