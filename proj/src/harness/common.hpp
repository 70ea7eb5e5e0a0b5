#pragma once

// Shared plumbing for the experiment implementations.

#include "sqfn/ball_family.hpp"
#include "sqfn/conditions.hpp"
#include "sqfn/harness.hpp"
#include "sqfn/kernels.hpp"
#include "sqfn/norms.hpp"
#include "sqfn/operators.hpp"
#include "sqfn/weights.hpp"

#include <string>
#include <vector>

namespace sqfn::harness {

double pget(const Json& params, const char* key, double fallback);
int pint(const Json& params, const char* key, int fallback);
std::string pstr(const Json& params, const char* key, const std::string& fallback);
std::vector<double> pvec(const Json& params, const char* key, std::vector<double> fallback);

int fine_points(const ExperimentConfig& cfg);
int coarse_points(const ExperimentConfig& cfg);

Weight make_weight(const ExperimentConfig& cfg, const Grid& g);
BallFamily make_family(const ExperimentConfig& cfg, const Grid& g);
KernelDictionary<double> make_dict(const ExperimentConfig& cfg, double alpha);

/// Everything one experiment needs at one resolution.
struct Resolution {
  Grid grid;
  Weight weight;
  ScaleGrid scales;
  BallFamily family;
  std::vector<CorpusField> corpus;
};

Resolution make_resolution(const ExperimentConfig& cfg, int points);

/// One A_alpha table per component of a vector field.
std::vector<AlphaTable> alpha_tables(const VecGridFunction<double>& f, const StencilBank<double>& bank);

/// Squared operator values summed over components.
std::vector<double> cone_sq(const std::vector<AlphaTable>& t, double beta, bool closed);
std::vector<double> vertical_sq(const std::vector<AlphaTable>& t);
std::vector<double> gstar_sq(const std::vector<AlphaTable>& t, double lambda);

GridFunctiond sqrt_field(const Grid& g, const std::vector<double>& squares);

/// (sum_i |f_i|^p w_i h^n)^{1/p} over the whole box.
double lp_box(const GridFunctiond& f, const Weight& w, double p);

struct TailRhs {
  double value = 0.0;
  double last_octave = 0.0;  ///< share of the integral from [T/2, T]
};

/// w(B)^{1/p} int_{2r}^{T} ln^k(e + t/r) ||fnorm||_{L^p_w(B(x0,t))} w(B(x0,t))^{-1/p} dt/t,
/// ball measures from the continuum weight.
TailRhs ball_tail_rhs(const GridFunctiond& fnorm, const Weight& w, double p, const Ball& ball, int korder,
                      double T, int per_octave = 8);

struct BallFit {
  double c_fit = 0.0;
  Ball argmax;
  std::string argmax_field;
  double last_octave = 0.0;
  double c_far = 0.0;  ///< restricted to fields vanishing on 2B
  std::size_t pairs = 0;
  std::size_t vacuous = 0;
};

struct OpField {
  std::string name;
  GridFunctiond op;     ///< |Op f| per node
  GridFunctiond fnorm;  ///< |f| per node
};

/// max over family x fields of LHS / RHS with LHS the (weak) L^p_w(B) norm of op.
BallFit fit_ball_constant(const std::vector<OpField>& fields, const Weight& w, double p, const BallFamily& fam,
                          int korder, double bmo_k, bool weak);

double drift(double a, double b);

/// Least squares y = a + s x with R^2.
struct LineFit {
  double intercept = 0.0, slope = 0.0, r2 = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// ln max(|x|, floor); the floor is fixed per config so both resolutions sample one function.
GridFunctiond log_symbol(const Grid& g, double floor);
double log_floor(const ExperimentConfig& cfg);
GridFunctiond linear_symbol(const Grid& g);

Json ball_json(const Ball& b, int dim);

}  // namespace sqfn::harness
