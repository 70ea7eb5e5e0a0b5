#include "doctest.h"
#include "oracles.hpp"

#include "sqfn/grid.hpp"

using namespace sqfn;

TEST_CASE("grid geometry") {
  const Grid g(1, 4.0, 33);
  CHECK(g.size() == 33);
  CHECK(g.spacing() == doctest::Approx(0.25));
  CHECK(g.node(0)[0] == doctest::Approx(-4.0));
  CHECK(g.node(32)[0] == doctest::Approx(4.0));
  CHECK(g.node(16)[0] == doctest::Approx(0.0));

  const Grid g2(2, 1.0, 9);
  CHECK(g2.size() == 81);
  for (std::size_t i = 0; i < g2.size(); ++i) {
    auto [i0, i1] = g2.multi_index(i);
    CHECK(g2.flat_index(i0, i1) == i);
    CHECK((g2.lattice_point(i0, i1) - g2.node(i)).norm() == 0.0);
  }
  CHECK(g.refined().points_per_axis() == 65);
  CHECK(g.coarsened().points_per_axis() == 17);
}

TEST_CASE("grid rejects bad sizes") {
  CHECK_THROWS_AS(Grid(1, 4.0, 32), Error);
  CHECK_THROWS_AS(Grid(1, 4.0, 7), Error);
  CHECK_THROWS_AS(Grid(3, 4.0, 33), Error);
  CHECK_THROWS_AS(Grid(1, -1.0, 33), Error);
}

TEST_CASE("radius ties") {
  const double R = 1.5;
  const double r2 = R * R;
  CHECK(within_radius(r2, R, true));
  CHECK_FALSE(within_radius(r2, R, false));
  CHECK(within_radius(r2 * (1.0 + 1e-12), R, true));
  CHECK_FALSE(within_radius(r2 * (1.0 + 1e-12), R, false));
  CHECK_FALSE(within_radius(r2 * (1.0 + 1e-10), R, true));
  CHECK(within_radius(r2 * (1.0 - 1e-10), R, false));
}

TEST_CASE("ball nodes match a full scan") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 2.0, dim == 1 ? 41 : 17);
    const double h = g.spacing();
    for (double r : {h, 2.5 * h, 3.0 * h, 7.0 * h})
      for (const Point& c : {Point(0.0, 0.0), g.node(3), Point(1.9, dim == 2 ? -1.9 : 0.0), Point(0.3 * h, 0.0)}) {
        const Ball b{c, r};
        const BallNodes nodes = ball_nodes(g, b);
        CHECK(nodes.indices == oracle::ball(g, b));
        CHECK(nodes.measure() == doctest::Approx(double(nodes.count()) * std::pow(h, dim)));
      }
  }
  const Grid g(1, 2.0, 41);
  CHECK_THROWS_AS(ball_nodes(g, Ball{Point::Zero(), 0.5 * g.spacing()}), Error);
}

TEST_CASE("exterior value and interpolation") {
  const Grid g(1, 1.0, 9);
  GridFunctiond::Values v(9);
  for (int i = 0; i < 9; ++i) v[i] = double(i);
  const GridFunctiond f(g, v, -2.0);
  CHECK(f.at_lattice(-1) == -2.0);
  CHECK(f.at_lattice(9) == -2.0);
  CHECK(f.at_lattice(4) == 4.0);
  CHECK(f.evaluate(point(0.125, 0.0)) == doctest::Approx(4.5));
  const GridFunctiond c = GridFunctiond::constant(g, 3.0);
  CHECK(c.at_lattice(-50) == 3.0);
  CHECK(GridFunctiond::zero(g).at_lattice(100) == 0.0);

  GridFunctiond::Values bad = v;
  bad[2] = std::nan("");
  CHECK_THROWS_AS(GridFunctiond(g, bad), Error);
}

TEST_CASE("pointwise l2 of a vector field") {
  const Grid g(1, 1.0, 9);
  const GridFunctiond a = sample(g, [](const Point& x) { return x[0]; });
  const GridFunctiond b = sample(g, [](const Point& x) { return 2.0 * x[0]; });
  const GridFunctiond n = l2_pointwise(VecGridFunction<double>({a, b}));
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(n[i] == doctest::Approx(std::sqrt(5.0) * std::abs(a[i])));
}
