#pragma once

// JSON and CSV serialization of grid objects, kernels and module reports.

#include "sqfn/conditions.hpp"
#include "sqfn/grid.hpp"
#include "sqfn/kernels.hpp"
#include "sqfn/norms.hpp"
#include "sqfn/operators.hpp"
#include "sqfn/weights.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace sqfn::io {

using Json = nlohmann::ordered_json;

/// Finite numbers as JSON numbers; inf and nan as the strings "inf", "-inf", "nan".
Json number(double v);
/// Inverse of number().
double to_double(const Json& j);

Json to_json(const Point& p, int dim);
Json to_json(const Ball& b, int dim);
Json to_json(const Grid& g);
Json to_json(const AdmissibilityReport& r);
Json to_json(const SquareFunctionDiagnostics& d);
Json to_json(const WeightDiagnostics& d);
Json to_json(const ReverseDoublingFit& f);
Json to_json(const LogPairReport& r);
Json to_json(const JohnNirenbergReport& r);
Json to_json(const OscillationEquivalence& r);
Json to_json(const HardyBoundReport& r);
Json to_json(const ConditionReport& r, const std::string& family_id, int dim);
Json to_json(const TailIntegral& t);

/// {norm_kind, p, phi_kind, family_id, value, argmax_ball}.
Json norm_report(const std::string& norm_kind, double p, const PhiFunction& phi, const NormValue& v, int dim);

/// Per-kernel admissibility certificate of a dictionary.
Json kernel_certificate(const KernelDictionary<double>& dict);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// CSV with 17 significant digits.
std::string to_csv(const Table& t);
void write_text(const std::string& path, const std::string& text);
void write_csv(const std::string& path, const Table& t);

/// Node coordinates and values.
Table field_table(const GridFunctiond& f, const std::string& name = "value");
/// Reference-grid tabulation of one kernel.
Table kernel_table(const TestKernel<double>& k);

}  // namespace sqfn::io
