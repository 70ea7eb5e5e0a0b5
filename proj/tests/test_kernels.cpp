#include "doctest.h"
#include "oracles.hpp"

#include "sqfn/kernels.hpp"

#include <cmath>

using namespace sqfn;

namespace {

double brute_seminorm(const TestKernel<double>& k) {
  double best = 0.0;
  for (std::size_t i = 0; i < k.reference_size(); ++i)
    for (std::size_t j = i + 1; j < k.reference_size(); ++j) {
      const double d = (k.reference_node(i) - k.reference_node(j)).norm();
      best = std::max(best, std::abs(k.values()[Eigen::Index(i)] - k.values()[Eigen::Index(j)]) / std::pow(d, k.alpha()));
    }
  return best;
}

}  // namespace

TEST_CASE("dictionary kernels are admissible") {
  for (int dim : {1, 2})
    for (double alpha : {0.5, 1.0}) {
      const auto dict = make_dictionary<double>(dim, alpha, 6);
      REQUIRE(dict.kernels.size() == 6);
      for (const auto& k : dict.kernels) {
        const auto rep = k.verify();
        CHECK(rep.support_ok);
        CHECK(rep.mean_ok);
        CHECK(rep.holder_ok);
        CHECK_FALSE(rep.degenerate);
      }
    }
}

TEST_CASE("dictionary is deterministic in the seed") {
  const auto a = make_dictionary<double>(1, 1.0, 6);
  const auto b = make_dictionary<double>(1, 1.0, 6);
  const auto c = make_dictionary<double>(1, 1.0, 6, 0, 12345);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.kernels.size(); ++i) {
    same = same && (a.kernels[i].values() == b.kernels[i].values()).all();
    differs = differs || !(a.kernels[i].values() == c.kernels[i].values()).all();
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("seminorm matches an all-pairs scan") {
  auto ramp = [](const Point& u) { return std::abs(u[0]) <= 1.0 ? 0.5 * u[0] : 0.0; };
  for (double alpha : {0.5, 1.0}) {
    const auto k = TestKernel<double>::tabulate(1, alpha, ramp, 41);
    CHECK(k.measure_seminorm() == doctest::Approx(brute_seminorm(k)).epsilon(1e-14));
  }
  const auto dict = make_dictionary<double>(2, 1.0, 4, 21);
  for (const auto& k : dict.kernels) CHECK(k.measure_seminorm() == doctest::Approx(brute_seminorm(k)).epsilon(1e-14));
}

TEST_CASE("admissibility failures are reported") {
  const auto offset = TestKernel<double>::tabulate(1, 1.0, [](const Point& u) {
    return std::abs(u[0]) < 1.0 ? 0.1 * (1.0 - std::abs(u[0])) : 0.0;
  });
  CHECK_FALSE(offset.verify().mean_ok);
  const auto leak = TestKernel<double>::tabulate(1, 1.0, [](const Point& u) { return 0.01 * u[0]; });
  CHECK_FALSE(leak.verify().support_ok);
  CHECK(leak.verify().support_leak > 0.0);
  const auto steep = TestKernel<double>::tabulate(1, 1.0, [](const Point& u) {
    return std::abs(u[0]) < 1.0 ? 5.0 * std::sin(M_PI * u[0]) : 0.0;
  });
  CHECK_FALSE(steep.verify().holder_ok);
  CHECK_THROWS_AS(make_dictionary<double>(1, 1.5, 6), Error);
  CHECK_THROWS_AS(make_dictionary<double>(1, 1.0, 3), Error);
}

TEST_CASE("kernel evaluation interpolates the tabulation") {
  const auto dict = make_dictionary<double>(1, 1.0, 4);
  const auto& k = dict.kernels.front();
  for (std::size_t i = 0; i < k.reference_size(); i += 17) CHECK(k.eval(k.reference_node(i)) == k.values()[Eigen::Index(i)]);
  const Point a = k.reference_node(300), b = k.reference_node(301);
  CHECK(k.eval(0.5 * (a + b)) == doctest::Approx(0.5 * (k.values()[300] + k.values()[301])));
  CHECK(k.eval(point(1.3)) == 0.0);
  CHECK(k.eval(point(1.1)) == 0.0);
}

TEST_CASE("dilated convolution matches the lattice oracle") {
  for (int dim : {1, 2}) {
    const Grid g(dim, 2.0, dim == 1 ? 33 : 17);
    const auto dict = make_dictionary<double>(dim, 1.0, 4);
    const GridFunctiond f = sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()) + 0.3 * x[0]; });
    for (double t : {g.spacing(), 0.6, 1.7})
      for (std::size_t j = 0; j < g.size(); j += 5) {
        auto [y0, y1] = g.multi_index(j);
        for (const auto& k : dict.kernels) {
          const double fast = dilated_convolve(f, k, t, g.node(j));
          const double slow = oracle::conv_mean_zero(g, k, t, y0, y1, oracle::field_values(f));
          CHECK(fast == doctest::Approx(slow).epsilon(1e-12).scale(1.0));
        }
      }
    const GridFunctiond c = GridFunctiond::constant(g, 7.0);
    for (const auto& k : dict.kernels) CHECK(dilated_convolve(c, k, 1.0, g.node(3)) == 0.0);
    CHECK_THROWS_AS(dilated_convolve(f, dict.kernels.front(), 0.1 * g.spacing(), g.node(0)), Error);
  }
}
