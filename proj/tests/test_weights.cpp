#include "doctest.h"
#include "oracles.hpp"

#include "sqfn/weights.hpp"

#include <cmath>

using namespace sqfn;

namespace {

/// int_0^b |x|^gamma dx via x = s^2, which removes the singularity at 0 for gamma >= -1/2.
double from_zero(double b, double gamma, int n) {
  const double S = std::sqrt(b), h = S / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = (i + 0.5) * h;
    acc += 2.0 * std::pow(s, 2.0 * gamma + 1.0);
  }
  return acc * h;
}

double midpoint_1d(double a, double b, double gamma, int n = 200000) {
  if (a >= 0.0) return from_zero(b, gamma, n) - from_zero(a, gamma, n);
  if (b <= 0.0) return from_zero(-a, gamma, n) - from_zero(-b, gamma, n);
  return from_zero(-a, gamma, n) + from_zero(b, gamma, n);
}

double polar_2d(const Point& c, double r, double gamma, int n = 1500) {
  const double dr = r / n, dth = 2.0 * M_PI / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double rho = (i + 0.5) * dr;
    for (int j = 0; j < n; ++j) {
      const double th = (j + 0.5) * dth;
      s += std::pow((c + rho * Point(std::cos(th), std::sin(th))).norm(), gamma) * rho;
    }
  }
  return s * dr * dth;
}

}  // namespace

TEST_CASE("weight measure matches a node scan") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 3.0, dim == 1 ? 61 : 25);
    const BallFamily fam = BallFamily::lattice(g, 3, 1.0, 4, g.spacing(), 2.0);
    for (const Weight& w : {Weight::constant(g, 2.0), Weight::power(g, 0.5), Weight::power(g, -0.5)})
      for (const Ball& b : fam.balls()) CHECK(measure(w, b) == doctest::Approx(oracle::weight_measure(w, b)).epsilon(1e-14));
  }
}

TEST_CASE("analytic measure of power weights") {
  const Grid g1(1, 4.0, 33);
  for (double gamma : {0.5, -0.5, 1.0})
    for (const Ball& b : {Ball{point(0.0), 1.0}, Ball{point(1.5), 0.5}, Ball{point(-0.3), 2.0}}) {
      const Weight w = Weight::power(g1, gamma);
      const double x = midpoint_1d(b.center[0] - b.radius, b.center[0] + b.radius, gamma);
      CHECK(analytic_measure(w, b) == doctest::Approx(x).epsilon(1e-5));
    }
  const Grid g2(2, 4.0, 17);
  for (double gamma : {0.5, -1.0})
    for (const Ball& b : {Ball{point(0.0, 0.0), 1.0}, Ball{point(1.5, 0.5), 0.7}, Ball{point(0.2, -0.3), 1.2}}) {
      const Weight w = Weight::power(g2, gamma);
      CHECK(analytic_measure(w, b) == doctest::Approx(polar_2d(b.center, b.radius, gamma)).epsilon(2e-4));
    }
  CHECK_THROWS_AS(analytic_measure(Weight::power(g1, -1.5), Ball{point(0.0), 1.0}), Error);
  CHECK(analytic_measure(Weight::constant(g1, 3.0), Ball{point(0.0), 1.0}) == doctest::Approx(6.0));
}

TEST_CASE("Ap characteristic matches a direct evaluation") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 3.0, dim == 1 ? 61 : 25);
    const BallFamily fam = BallFamily::lattice(g, 5, 1.5, 5, g.spacing(), 1.5);
    for (double gamma : {0.5, -0.5})
      for (double p : {1.5, 2.0, 3.0}) {
        const Weight w = Weight::power(g, gamma);
        CHECK(ap_characteristic(w, p, fam) == doctest::Approx(oracle::ap(w, p, fam.balls())).epsilon(1e-13));
      }
    const Weight c = Weight::constant(g, 4.0);
    CHECK(ap_characteristic(c, 2.0, fam) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(a1_characteristic(c, fam) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(ap_characteristic(c, 1.0, fam), Error);
  }
}

TEST_CASE("Ap grows without bound for a non-Ap power") {
  const Grid g(1, 4.0, 129);
  const BallFamily fam = BallFamily::lattice(g, 9, 2.0, 8, 0.25, 2.0);
  auto chr = [](const Weight& x, const BallFamily& f) { return ap_characteristic(x, 2.0, f); };
  const double good = refinement_growth(Weight::power(g, 0.5), fam, chr);
  const double bad = refinement_growth(Weight::power(g, 1.5), fam, chr);
  CHECK(accepted_by_growth(good));
  CHECK(bad > good);
  CHECK(std::abs(refinement_growth(Weight::constant(g, 1.0), fam, chr)) < 1e-12);
}

TEST_CASE("doubling ratio against the node scan") {
  const Grid g(1, 4.0, 65);
  const BallFamily fam = BallFamily::lattice(g, 5, 1.0, 4, 0.25, 1.5);
  const Weight w = Weight::power(g, 0.5);
  double expect = 0.0;
  std::size_t used = 0;
  for (const Ball& b : fam.balls()) {
    if (std::abs(b.center[0]) + 2.0 * b.radius > 4.0 * (1.0 + 1e-12)) continue;
    ++used;
    expect = std::max(expect, oracle::weight_measure(w, b.scaled(2.0)) / oracle::weight_measure(w, b));
  }
  const DoublingReport rep = doubling_constant(w, fam);
  CHECK(rep.evaluated == used);
  CHECK(rep.evaluated + rep.skipped == fam.size());
  CHECK(rep.value == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("reverse doubling") {
  const Grid g(1, 4.0, 129);
  const BallFamily fam = BallFamily::lattice(g, 9, 2.0, 8, 0.25, 2.0);
  const ReverseDoublingFit flat = check_reverse_doubling(Weight::constant(g, 1.0), 2.0, fam);
  CHECK(flat.delta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.constant == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat.holds);
  const ReverseDoublingFit pw = check_reverse_doubling(Weight::power(g, 0.5), 2.0, fam);
  CHECK(pw.delta > 0.0);
  CHECK(pw.delta <= 1.0);
  CHECK(pw.fit_pairs > 0);
  CHECK(pw.holdout_pairs > 0);
}

TEST_CASE("weight construction and transforms") {
  const Grid g(1, 2.0, 17);
  CHECK_THROWS_AS(Weight::constant(g, 0.0), Error);
  CHECK_THROWS_AS(Weight::tabulated(GridFunctiond::zero(g)), Error);
  const Weight w = Weight::power(g, 0.5);
  CHECK(w[8] == doctest::Approx(std::pow(0.5 * g.spacing(), 0.5)));
  CHECK(w.dual(2.0).parameter() == doctest::Approx(-0.5));
  CHECK(w.power_of(2.0).parameter() == doctest::Approx(1.0));
  CHECK(w.on(g.refined()).grid() == g.refined());
  const Weight t = Weight::tabulated(w.nodal());
  CHECK_THROWS_AS(t.on(g.refined()), Error);
}
