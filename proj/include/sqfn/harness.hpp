#pragma once

// Experiment runner: configuration, the fixed test-field corpus, check records
// and the registry of experiments.

#include "sqfn/grid.hpp"
#include "sqfn/io.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace sqfn::harness {

using io::Json;

inline constexpr const char* kConfigSchema = "sqfn-lab/config-v1";
inline constexpr const char* kReportSchema = "sqfn-lab/report-v1";
inline constexpr const char* kCorpusVersion = "corpus-v1";

struct GridSpec {
  int dim = 1;
  double half_width = 4.0;
  int points = 129;
};

struct WeightSpec {
  std::string kind = "power";  ///< power or constant
  double parameter = 0.5;      ///< gamma, or the constant
};

struct KernelSpec {
  double alpha = 1.0;
  int size = 6;
};

struct FamilySpec {
  int centers = 9;
  double center_extent = 2.0;
  int radii = 8;
  double r_min = 0.25;
  double r_max = 2.0;
};

struct ExperimentSpec {
  std::string name;
  Json params = Json::object();
};

struct ExperimentConfig {
  std::string schema = kConfigSchema;
  std::uint64_t seed = 20240611;
  std::string output = "sqfn-out";
  GridSpec grid;
  WeightSpec weight;
  KernelSpec kernel;
  int per_octave = 4;
  FamilySpec family;
  std::vector<ExperimentSpec> experiments;
};

ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);
Json to_json(const ExperimentConfig& cfg);

struct Validation {
  std::vector<std::string> errors;
  std::vector<std::string> flags;  ///< accepted boundary cases
  bool ok() const { return errors.empty(); }
};

Validation validate(const ExperimentConfig& cfg);

/// One inequality or identity. The verdict is a function of relation, lhs, rhs
/// and tolerance only:
///   le: lhs <= rhs (1 + tol), or both zero
///   lt: lhs < rhs
///   ge: lhs >= rhs (1 - tol)
///   eq: |lhs - rhs| <= tol max(|lhs|, |rhs|)
///   finite: lhs finite
struct CheckRecord {
  std::string name;
  std::string relation;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  double ratio = 0.0;
  bool pass = false;
  std::string verdict;  ///< pass, pass_vacuous or fail

  static CheckRecord make(std::string name, std::string relation, double lhs, double rhs, double tolerance);
};

bool evaluate_relation(const std::string& relation, double lhs, double rhs, double tolerance);
Json to_json(const CheckRecord& c);

struct ExperimentReport {
  std::string name;
  Json params = Json::object();
  std::vector<CheckRecord> checks;
  Json fitted = Json::object();
  Json refinement = Json::object();
  Json extra = Json::object();
  std::vector<std::string> flags;
  std::map<std::string, io::Table> plots;  ///< file stem -> table

  void check(std::string name, std::string relation, double lhs, double rhs, double tolerance = 0.0) {
    checks.push_back(CheckRecord::make(std::move(name), std::move(relation), lhs, rhs, tolerance));
  }
  bool passed() const;
};

Json to_json(const ExperimentReport& r);

struct CorpusField {
  std::string name;
  VecGridFunction<double> field;
};

/// corpus-v1: centred bump, off-centre bump, ball indicator, tapered random
/// band-limited field, and two- and five-component vector fields.
std::vector<CorpusField> make_corpus(const Grid& g, std::uint64_t seed);

using ExperimentFn = std::function<ExperimentReport(const ExperimentConfig&, const Json&)>;

struct ExperimentInfo {
  std::string name;
  std::string summary;
  ExperimentFn run;
};

const std::vector<ExperimentInfo>& registry();
const ExperimentInfo* find_experiment(const std::string& name);

struct RunResult {
  Json report;
  std::vector<ExperimentReport> experiments;
  std::vector<std::pair<std::string, double>> seconds;  ///< per experiment wall time
  bool passed = true;
};

/// Validates and runs every listed experiment; throws Error on invalid configs.
RunResult run(const ExperimentConfig& cfg);

/// report.json, timing.json and one CSV per plot table under cfg.output.
void write_outputs(const ExperimentConfig& cfg, const RunResult& result);

/// Byte-exact serialization used for report.json.
std::string serialize(const Json& report);

}  // namespace sqfn::harness
