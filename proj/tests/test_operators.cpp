#include "doctest.h"
#include "oracles.hpp"

#include "sqfn/operators.hpp"

#include <cmath>

using namespace sqfn;
using oracle::Kind;

namespace {

constexpr double kTol = 1e-10;

struct Setup {
  Grid g;
  KernelDictionary<double> dict;
  ScaleGrid scales;
  StencilBank<double> bank;
  GridFunctiond f, b;

  explicit Setup(int dim, int m = 0, double L = 0.0)
      : g(dim, L > 0.0 ? L : (dim == 1 ? 4.0 : 2.0), m > 0 ? m : (dim == 1 ? 17 : 9)),
        dict(make_dictionary<double>(dim, 1.0, 4)),
        scales(ScaleGrid::for_grid(g)),
        bank(g, dict, scales),
        f(sample(g, [](const Point& x) { return std::exp(-x.squaredNorm()) + 0.25 * x[0] * std::exp(-0.5 * x.squaredNorm()); })),
        b(sample(g, [](const Point& x) { return std::log(std::max(x.norm(), 0.25)); })) {}
};

std::vector<double> values(const GridFunctiond& f) { return std::vector<double>(f.values().begin(), f.values().end()); }

}  // namespace

TEST_CASE("scale grid") {
  const Grid g(1, 4.0, 129);
  const ScaleGrid s = ScaleGrid::for_grid(g);
  CHECK(s.size() == 29);
  CHECK(s.t_min() == doctest::Approx(g.spacing()));
  CHECK(s.t_max() == doctest::Approx(8.0));
  double sum = 0.0;
  for (double w : s.log_weights()) sum += w;
  CHECK(sum == doctest::Approx(std::log(s.t_max() / s.t_min())).epsilon(1e-14));
  CHECK_THROWS_AS(ScaleGrid(std::vector<double>{1.0, 1.0}), Error);
  CHECK_THROWS_AS(ScaleGrid::geometric(0.0, 1.0), Error);
}

TEST_CASE("A_alpha table matches the lattice oracle") {
  for (int dim : {1, 2}) {
    const Setup s(dim);
    const AlphaTable A(s.f, s.bank);
    const auto ref = oracle::alpha_table(s.g, s.dict, s.scales, oracle::field_values(s.f));
    std::vector<double> got(ref.size());
    for (std::size_t k = 0; k < s.scales.size(); ++k)
      for (std::size_t i = 0; i < s.g.size(); ++i) got[k * s.g.size() + i] = A(k, i);
    CHECK(oracle::rel_sup(got, ref, ref.size()) <= kTol);
    for (std::size_t i = 0; i < s.g.size(); i += 3)
      CHECK(a_alpha(s.f, s.dict, s.g.node(i), s.scales[2]) == doctest::Approx(A(2, i)).epsilon(1e-12));
  }
}

TEST_CASE("square functions match the lattice oracles") {
  for (int dim : {1, 2}) {
    const Setup s(dim);
    const std::size_t n = s.g.size();
    const auto G = oracle::square_function(s.f, s.dict, s.scales, Kind::Cone, 1.0, false);
    const auto G2 = oracle::square_function(s.f, s.dict, s.scales, Kind::Cone, 2.0, false);
    const auto P1 = oracle::square_function(s.f, s.dict, s.scales, Kind::Cone, 2.0, true);
    const auto P2 = oracle::square_function(s.f, s.dict, s.scales, Kind::Cone, 4.0, true);
    const auto gv = oracle::square_function(s.f, s.dict, s.scales, Kind::Vertical);
    const auto gs4 = oracle::square_function(s.f, s.dict, s.scales, Kind::Star, 1.0, false, 4.0);
    const auto gs25 = oracle::square_function(s.f, s.dict, s.scales, Kind::Star, 1.0, false, 2.5);
    CHECK(oracle::rel_sup(values(g_sq_field(s.f, s.bank).field), G, n) <= kTol);
    CHECK(oracle::rel_sup(values(g_sq_field(s.f, s.bank, 2.0).field), G2, n) <= kTol);
    CHECK(oracle::rel_sup(values(g_sq_aperture_pow2_field(s.f, s.bank, 1).field), P1, n) <= kTol);
    CHECK(oracle::rel_sup(values(g_sq_aperture_pow2_field(s.f, s.bank, 2).field), P2, n) <= kTol);
    CHECK(oracle::rel_sup(values(g_vertical_field(s.f, s.bank).field), gv, n) <= kTol);
    CHECK(oracle::rel_sup(values(g_star_field(s.f, s.bank, 4.0).field), gs4, n) <= kTol);
    CHECK(oracle::rel_sup(values(g_star_field(s.f, s.bank, 2.5).field), gs25, n) <= kTol);

    for (std::size_t i = 0; i < n; i += 4) {
      const Point x = s.g.node(i);
      CHECK(g_sq(s.f, s.dict, s.scales, 1.0, x) == doctest::Approx(G[i]).epsilon(1e-10));
      CHECK(g_sq_aperture_pow2(s.f, s.dict, s.scales, 1, x) == doctest::Approx(P1[i]).epsilon(1e-10));
      CHECK(g_vertical(s.f, s.dict, s.scales, x) == doctest::Approx(gv[i]).epsilon(1e-10));
      CHECK(g_star(s.f, s.dict, s.scales, 4.0, x) == doctest::Approx(gs4[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("commutators match the per-point oracle") {
  for (int dim : {1, 2}) {
    const Setup s(dim);
    const std::size_t n = s.g.size();
    for (int k : {1, 2}) {
      const auto cG = oracle::commutator(s.f, s.b, k, s.dict, s.scales, Kind::Cone);
      const auto cg = oracle::commutator(s.f, s.b, k, s.dict, s.scales, Kind::Vertical);
      const auto cs = oracle::commutator(s.f, s.b, k, s.dict, s.scales, Kind::Star, 1.0, 4.0);
      CHECK(oracle::rel_sup(values(comm_g_sq_field(s.f, s.bank, s.b, k).field), cG, n) <= kTol);
      CHECK(oracle::rel_sup(values(comm_g_vertical_field(s.f, s.bank, s.b, k).field), cg, n) <= kTol);
      CHECK(oracle::rel_sup(values(comm_g_star_field(s.f, s.bank, s.b, k, 4.0).field), cs, n) <= kTol);
    }
  }
}

TEST_CASE("commutator inner convolution at a point") {
  const Setup s(1);
  for (int k : {1, 2, 3})
    for (std::size_t xi : {3u, 8u, 12u})
      for (std::size_t yi : {0u, 7u, 16u}) {
        const double bx = s.b[xi];
        auto gx = [&](int i0, int i1) { return std::pow(bx - s.b.at_lattice(i0, i1), k) * s.f.at_lattice(i0, i1); };
        auto [y0, y1] = s.g.multi_index(yi);
        for (double t : {s.scales[0], s.scales[5], s.scales[12]}) {
          double ref = 0.0;
          for (const auto& ker : s.dict.kernels)
            ref = std::max(ref, std::abs(oracle::conv_mean_zero(s.g, ker, t, y0, y1, gx)));
          CHECK(a_alpha_comm(s.f, s.dict, s.b, k, s.g.node(xi), s.g.node(yi), t) ==
                doctest::Approx(ref).epsilon(1e-12).scale(1e-3));
        }
      }
}

TEST_CASE("g* aperture split against a direct partition") {
  const Setup s(1, 33);
  const AlphaTable A(s.f, s.bank);
  const int jmax = 3;
  const double lambda = 4.0;
  const GstarSplit sp = gstar_split(A, lambda, jmax);
  const auto& sc = s.scales;
  const Grid& g = s.g;
  for (std::size_t x = 0; x < g.size(); x += 2) {
    std::vector<double> parts(jmax + 2, 0.0);
    for (std::size_t k = 0; k < sc.size(); ++k) {
      const double t = sc[k];
      for (std::size_t y = 0; y < g.size(); ++y) {
        const double r = std::abs(g.node(y)[0] - g.node(x)[0]);
        std::size_t slot = jmax + 1;
        if (oracle::inside(r * r, t, false)) slot = 0;
        else
          for (int q = 1; q <= jmax; ++q)
            if (oracle::inside(r * r, std::ldexp(t, q), false)) {
              slot = std::size_t(q);
              break;
            }
        parts[slot] += sc.log_weights()[k] * g.spacing() / t * std::pow(t / (t + r), lambda) * A(k, y) * A(k, y);
      }
    }
    CHECK(sp.core[x] == doctest::Approx(parts[0]).epsilon(1e-10));
    double total = sp.core[x];
    for (int q = 1; q <= jmax + 1; ++q) {
      CHECK(sp.annuli[std::size_t(q - 1)][x] == doctest::Approx(parts[std::size_t(q)]).epsilon(1e-10).scale(1e-300));
      total += sp.annuli[std::size_t(q - 1)][x];
    }
    CHECK(total == doctest::Approx(gstar_square_sum_at(A, lambda, g.node(x))).epsilon(1e-12));
  }
}

TEST_CASE("operator identities") {
  const Setup s(1, 33);
  const std::size_t n = s.g.size();
  const auto G = g_sq_field(s.f, s.bank).field;
  const auto G2 = g_sq_field(s.f, s.bank, 2.0).field;
  const auto gs = g_star_field(s.f, s.bank, 4.0).field;
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(G2[i] >= G[i]);
    CHECK(gs[i] * gs[i] >= std::pow(2.0, -4.0) * G[i] * G[i] * (1.0 - 1e-12));
  }
  const GridFunctiond f3(s.g, -3.0 * s.f.values());
  CHECK(oracle::rel_sup(values(g_sq_field(f3, s.bank).field), (3.0 * G.values()).eval(), n) <= 1e-13);

  for (double c : {1.0, -3.5, 1e3}) {
    const GridFunctiond k = GridFunctiond::constant(s.g, c);
    CHECK(g_sq_field(k, s.bank).field.max_abs() <= 1e-8 * std::abs(c));
    CHECK(g_vertical_field(k, s.bank).field.max_abs() <= 1e-8 * std::abs(c));
    CHECK(g_star_field(k, s.bank, 4.0).field.max_abs() <= 1e-8 * std::abs(c));
  }
  CHECK(g_sq_field(GridFunctiond::zero(s.g), s.bank).field.max_abs() == 0.0);

  const GridFunctiond bc = GridFunctiond::constant(s.g, 2.5);
  CHECK(comm_g_sq_field(s.f, s.bank, bc, 2).field.max_abs() == 0.0);
  const CommutatorTables<double> tab(s.f, bc, 1, s.bank);
  for (double v : detail::comm_square_sums(tab, detail::CommKind::Cone, 1.0, 0.0)) CHECK(v == 0.0);

  const GridFunctiond bshift(s.g, s.b.values() + 5.0, s.b.exterior() + 5.0);
  const GridFunctiond bscaled(s.g, 2.0 * s.b.values(), 2.0 * s.b.exterior());
  for (int k : {1, 2}) {
    const auto base = comm_g_sq_field(s.f, s.bank, s.b, k).field;
    CHECK(oracle::rel_sup(values(comm_g_sq_field(s.f, s.bank, bshift, k).field), values(base), n) <= 1e-10);
    CHECK(oracle::rel_sup(values(comm_g_sq_field(s.f, s.bank, bscaled, k).field),
                          (std::pow(2.0, k) * base.values()).eval(), n) <= 1e-12);
  }
  CHECK_THROWS_AS(comm_g_sq_field(s.f, s.bank, s.b, 4), Error);
  CHECK_THROWS_AS(g_star_field(s.f, s.bank, 1.0), Error);
}

TEST_CASE("vector wrapper takes the pointwise l2 norm") {
  const Setup s(1, 33);
  const VecGridFunction<double> vf({s.f, GridFunctiond(s.g, 2.0 * s.f.values())});
  const auto out = vector_apply([&](const GridFunctiond& c) { return g_sq_field(c, s.bank); }, vf);
  const auto G = g_sq_field(s.f, s.bank).field;
  CHECK(oracle::rel_sup(values(out), (std::sqrt(5.0) * G.values()).eval(), s.g.size()) <= 1e-13);
}
