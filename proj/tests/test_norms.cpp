#include "doctest.h"
#include "oracles.hpp"

#include "sqfn/norms.hpp"

#include <cmath>
#include <random>

using namespace sqfn;

namespace {

GridFunctiond tie_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-4, 4);
  GridFunctiond::Values v(Eigen::Index(g.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 0.5 * d(rng);
  return GridFunctiond(g, v);
}

double morrey_oracle(const GridFunctiond& f, const Weight& w, double p, const PhiFunction& phi,
                     const BallFamily& fam, bool weak) {
  double best = 0.0;
  for (const Ball& b : fam.balls()) {
    const double local = weak ? oracle::weak_lp(f, w, p, b) : oracle::lp(f, w, p, b);
    best = std::max(best, local / (phi(b.center, b.radius) * std::pow(oracle::weight_measure(w, b), 1.0 / p)));
  }
  return best;
}

}  // namespace

TEST_CASE("local strong and weak norms against direct scans") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 2.0, dim == 1 ? 41 : 17);
    const BallFamily fam = BallFamily::lattice(g, 3, 0.5, 4, g.spacing(), 1.5);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const GridFunctiond f = tie_field(g, seed);
      for (const Weight& w : {Weight::constant(g, 1.0), Weight::power(g, 0.5)})
        for (double p : {1.0, 2.0, 3.5})
          for (const Ball& b : fam.balls()) {
            const double strong = lp_w_ball(f, w, p, b);
            const double weak = weak_lp_w_ball(f, w, p, b);
            CHECK(strong == doctest::Approx(oracle::lp(f, w, p, b)).epsilon(1e-13));
            CHECK(weak == doctest::Approx(oracle::weak_lp(f, w, p, b)).epsilon(1e-13));
            CHECK(weak <= strong);
          }
    }
  }
}

TEST_CASE("norms of constants and indicators") {
  const Grid g(1, 2.0, 41);
  const Weight one = Weight::constant(g, 1.0);
  const Ball b{point(0.0), 1.0};
  const BallNodes nodes = ball_nodes(g, b);
  const GridFunctiond c = GridFunctiond::constant(g, 3.0);
  CHECK(lp_w_ball(c, one, 2.0, b) == doctest::Approx(3.0 * std::sqrt(nodes.measure())));
  CHECK(weak_lp_w_ball(c, one, 2.0, b) == doctest::Approx(3.0 * std::sqrt(nodes.measure())));
  const GridFunctiond ind = sample(g, [](const Point& x) { return x[0] > -0.05 ? 1.0 : 0.0; });
  CHECK(weak_lp_w_ball(ind, one, 1.0, b) == doctest::Approx(11 * g.spacing()));
  CHECK(weak_lp_w_ball(GridFunctiond::zero(g), one, 1.0, b) == 0.0);
  CHECK_THROWS_AS(lp_w_ball(c, one, 0.5, b), Error);
}

TEST_CASE("BMO norm against the direct oscillation") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 3.0, dim == 1 ? 61 : 25);
    const BallFamily fam = BallFamily::lattice(g, 5, 1.0, 4, g.spacing(), 2.0);
    const GridFunctiond b = sample(g, [](const Point& x) { return std::log(std::max(x.norm(), 0.1)); });
    CHECK(bmo_norm(b, fam).value == doctest::Approx(oracle::bmo(b, fam.balls())).epsilon(1e-13));
    const GridFunctiond shifted(g, b.values() + 17.0);
    CHECK(bmo_norm(shifted, fam).value == doctest::Approx(bmo_norm(b, fam).value).epsilon(1e-12));
    CHECK(bmo_norm(GridFunctiond::constant(g, 2.0), fam).value == 0.0);
    const Weight one = Weight::constant(g, 1.0);
    CHECK(bmo_norm_weighted(b, one, fam).value == doctest::Approx(bmo_norm(b, fam).value).epsilon(1e-14));
  }
}

TEST_CASE("Morrey norms against the defining maximum") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 3.0, dim == 1 ? 61 : 25);
    const BallFamily fam = BallFamily::lattice(g, 3, 1.0, 4, g.spacing(), 2.0);
    const GridFunctiond f = sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()) * (1.0 + x[0]); });
    const Weight one = Weight::constant(g, 1.0);
    const Weight w = Weight::power(g, 0.5);
    const Weight v = Weight::power(g, -0.25);
    const std::vector<std::pair<const Weight*, PhiFunction>> cases{
        {&one, PhiFunction::power(0.5, 2.0, dim)},
        {&w, PhiFunction::weighted_morrey(0.5, 2.0, w)},
        {&w, PhiFunction::weighted_morrey(0.5, 2.0, w, MeasureMode::Analytic)},
        {&w, PhiFunction::two_weight(0.5, 2.0, v, w)},
        {&w, PhiFunction::custom("r^-0.3", [](const Point&, double r) { return std::pow(r, -0.3); })},
    };
    for (const auto& [wt, phi] : cases)
      for (bool weak : {false, true}) {
        const double p = 2.0;
        CHECK(morrey_norm(f, *wt, p, phi, fam, weak).value ==
              doctest::Approx(morrey_oracle(f, *wt, p, phi, fam, weak)).epsilon(1e-12));
      }
    const VecGridFunction<double> vf({f, GridFunctiond(g, 2.0 * f.values())});
    CHECK(morrey_norm(vf, one, 2.0, PhiFunction::power(0.5, 2.0, dim), fam).value ==
          doctest::Approx(std::sqrt(5.0) * morrey_norm(f, one, 2.0, PhiFunction::power(0.5, 2.0, dim), fam).value));
  }
}

TEST_CASE("phi evaluators") {
  const Grid g(1, 3.0, 61);
  CHECK(PhiFunction::power(0.5, 2.0, 1)(point(0.0), 4.0) == doctest::Approx(std::pow(4.0, -0.25)));
  CHECK(PhiFunction::radial_power(-1.0)(point(0.0), 4.0) == doctest::Approx(0.25));
  const Weight w = Weight::power(g, 0.5);
  const Ball b{point(0.5), 1.0};
  CHECK(PhiFunction::weighted_morrey(0.5, 2.0, w)(b.center, b.radius) ==
        doctest::Approx(std::pow(oracle::weight_measure(w, b), -0.25)));
  CHECK_THROWS_AS(PhiFunction::custom("bad", [](const Point&, double) { return 0.0; })(point(0.0), 1.0), Error);
}

TEST_CASE("John-Nirenberg distribution counts") {
  const Grid g(1, 4.0, 257);
  const GridFunctiond b = sample(g, [](const Point& x) { return std::log(std::max(std::abs(x[0]), 1.0 / 64)); });
  const Weight one = Weight::constant(g, 1.0);
  const BallFamily fam = BallFamily::lattice(g, 9, 2.0, 8, 0.25, 2.0);
  const double bmo = bmo_norm(b, fam).value;
  const Ball ball{point(0.0), 2.0};
  const JohnNirenbergReport jn = john_nirenberg_probe(b, one, ball, bmo);
  REQUIRE(jn.beta.size() == 24);
  const auto nodes = oracle::ball(g, ball);
  double mean = 0.0;
  for (std::size_t i : nodes) mean += b[i];
  mean /= double(nodes.size());
  for (std::size_t k = 0; k < jn.beta.size(); ++k) {
    std::size_t above = 0;
    for (std::size_t i : nodes) above += std::abs(b[i] - mean) > jn.beta[k];
    CHECK(jn.distribution[k] == doctest::Approx(double(above) / double(nodes.size())).epsilon(1e-14));
  }
  CHECK(jn.C2 > 0.0);
  CHECK(jn.rmse <= 0.2);
}

TEST_CASE("oscillation sups are ordered in p") {
  const Grid g(1, 4.0, 129);
  const BallFamily fam = BallFamily::lattice(g, 9, 2.0, 8, 0.25, 2.0);
  const GridFunctiond b = sample(g, [](const Point& x) { return std::log(std::max(std::abs(x[0]), 1.0 / 32)); });
  const OscillationEquivalence oe = oscillation_equivalence(b, Weight::power(g, 0.5), fam);
  REQUIRE(oe.ratio.size() == 3);
  CHECK(oe.ratio[0] == 1.0);
  CHECK(oe.sup[1] >= oe.sup[0]);
  CHECK(oe.sup[2] >= oe.sup[1]);
}
