// Scalar envelope maps, the triple map phi, certified fixed-point brackets,
// the two-round pipeline, and the one-dimensional stability diagnostics.
#include <doctest.h>

#include <liptree/envelope.hpp>
#include <liptree/recursion.hpp>

#include <stdexcept>

#include "expected_values.hpp"

using namespace liptree;
namespace expected = liptree::expected;
using Q = mpq_class;

TEST_SUITE("envelope") {

TEST_CASE("scalar maps have the advertised monotonicity") {
  const Q one(1);
  for (int d : {2, 4, 7}) {
    CAPTURE(d);
    // f(1, .) decreasing; f increasing in alpha.
    CHECK(f_map(one, Q(3, 10), d) > f_map(one, Q(6, 10), d));
    CHECK(f_map(Q(3, 2), Q(1, 2), d) > f_map(one, Q(1, 2), d));
    // g increasing in x and in b.
    CHECK(g_map(Q(1, 2), Q(2, 5), d) > g_map(Q(1, 2), Q(1, 5), d));
    CHECK(g_map(Q(3, 5), Q(1, 5), d) > g_map(Q(1, 2), Q(1, 5), d));
    // i increasing in x, decreasing in c; j increasing in both.
    CHECK(i_map(Q(1, 10), Q(1, 2), d) > i_map(Q(1, 10), Q(1, 4), d));
    CHECK(i_map(Q(1, 5), Q(1, 2), d) < i_map(Q(1, 10), Q(1, 2), d));
    CHECK(j_map(Q(1, 10), Q(1, 2), d) > j_map(Q(1, 10), Q(1, 4), d));
    CHECK(j_map(Q(1, 5), Q(1, 2), d) > j_map(Q(1, 10), Q(1, 2), d));
  }
}

TEST_CASE("dg/dx equals 2d/3 at b = x = 1 exactly") {
  for (int d = 2; d <= 8; ++d) {
    Q expect(2 * d, 3);
    expect.canonicalize();  // mpq_class(n, d) stores n/d verbatim
    CHECK(g_map_dx(Q(1), Q(1), d) == expect);
  }
}

TEST_CASE("phi preserves the parameter simplex") {
  Rng rng = Rng::stream(expected::kDefaultSeed, 41);
  for (int d : {2, 3, 5, 7, 8}) {
    for (int s = 0; s < 200; ++s) {
      EnvelopeTriple<double> t;
      t.b = rng.uniform(0.05, 1.0);
      t.a = rng.uniform(0.0, t.b);
      t.c = rng.uniform(0.0, t.b);
      REQUIRE(t.in_simplex());
      auto u = phi_map(t, d);
      CAPTURE(d);
      CAPTURE(t.a);
      CAPTURE(t.b);
      CAPTURE(t.c);
      CHECK(u.in_simplex());
    }
  }
  CHECK_THROWS_AS(phi_map(EnvelopeTriple<double>{0.8, 0.5, 0.1}, 2),
                  std::invalid_argument);
}

TEST_CASE("iterating phi from (0,1,.9) reproduces the printed fixed points") {
  for (int d = 2; d <= 8; ++d) {
    CAPTURE(d);
    auto t = iterate_phi(EnvelopeTriple<double>{0.0, 1.0, 0.9}, d, 10000);
    CHECK(expected::matches_printed(t.a, expected::kEnvelopeAStar[d - 2]));
    CHECK(expected::matches_printed(t.b, expected::kEnvelopeBStar[d - 2]));
    CHECK(expected::matches_printed(t.c, expected::kEnvelopeCStar[d - 2]));
    CHECK(t.a == doctest::Approx(expected::kEnvelopeComputed[d - 2][0]).epsilon(1e-4));
    CHECK(t.b == doctest::Approx(expected::kEnvelopeComputed[d - 2][1]).epsilon(1e-4));
    CHECK(t.c == doctest::Approx(expected::kEnvelopeComputed[d - 2][2]).epsilon(1e-4));
  }
}

TEST_CASE("psi maps the envelope into the phi image envelope") {
  Rng rng = Rng::stream(expected::kDefaultSeed, 42);
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    const auto t = tables::certified_triple(d);
    const EnvelopeTriple<double> tf{to_double(t.a), to_double(t.b), to_double(t.c)};
    const auto u = phi_map(t, d);
    for (int s = 0; s < 200; ++s) {
      auto xf = random_envelope_member(tf, 10, rng, rng.uniform(0.2, 1.0));
      // Exactify and clamp into the exact envelope box (float rounding can
      // leave a sampled coordinate a few ulps outside).
      RatioSeq<Q> x;
      x.entries.resize(xf.entries.size());
      for (std::size_t i = 0; i < xf.entries.size(); ++i) {
        Q v = rational_from_double(xf.entries[i]);
        if (i == 0) v = std::min(std::max(v, t.a), t.b);
        else v = std::min(std::max(v, Q(0)), t.c);
        x.entries[i] = v;
      }
      REQUIRE(envelope_contains(t, x));
      auto y = apply_psi(x, d);
      CAPTURE(s);
      CHECK(envelope_contains(u, y));
    }
  }
}

TEST_CASE("random_envelope_member respects the box and the decay profile") {
  Rng rng = Rng::stream(expected::kDefaultSeed, 43);
  EnvelopeTriple<double> t{0.3, 0.5, 0.1};
  for (int s = 0; s < 50; ++s) {
    auto x = random_envelope_member(t, 8, rng, 0.5);
    REQUIRE(x.entries.size() == 8);
    CHECK(x.at(1) >= t.a);
    CHECK(x.at(1) <= t.b);
    double scale = t.c;
    for (std::size_t n = 2; n <= 8; ++n) {
      CHECK(x.at(n) >= 0.0);
      CHECK(x.at(n) <= scale);
      scale *= 0.5;
    }
  }
  CHECK(random_envelope_member(t, 0, rng).entries.empty());
}

TEST_CASE("bracket_fixed_point certifies signs exactly or declines") {
  // g(1,.) at d = 2: the fixed point lies in (.4, .5).
  auto ok = bracket_fixed_point(ScalarMapId::g_of_b, Q(1), Q(2, 5), Q(1, 2), 2);
  REQUIRE(ok.has_value());
  CHECK(ok->residual_lo > 0);
  CHECK(ok->residual_hi < 0);
  CHECK(ok->residual_lo == g_map(Q(1), Q(2, 5), 2) - Q(2, 5));

  CHECK_FALSE(bracket_fixed_point(ScalarMapId::g_of_b, Q(1), Q(9, 10), Q(19, 20), 2)
                  .has_value());
  CHECK_FALSE(bracket_fixed_point(ScalarMapId::g_of_b, Q(1), Q(1, 2), Q(1, 2), 2)
                  .has_value());
}

TEST_CASE("auto_bracket pins the float estimate inside an exact bracket") {
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    for (auto id : {ScalarMapId::g_of_b, ScalarMapId::i_of_c, ScalarMapId::j_of_c}) {
      CAPTURE(scalar_map_name(id));
      Q param = id == ScalarMapId::g_of_b ? Q(1) : Q(1, 5);
      auto br = auto_bracket(id, param, d);
      double est = scalar_fixed_point_estimate(id, to_double(param), d);
      CHECK(br.lo < br.hi);
      CHECK(to_double(br.lo) <= est + 1e-12);
      CHECK(to_double(br.hi) >= est - 1e-12);
      CHECK(to_double(br.hi - br.lo) < 0.01);
      CHECK(br.residual_lo > 0);
      CHECK(br.residual_hi < 0);
    }
  }
}

TEST_CASE("two-round pipeline produces a certified box around the fixed point") {
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    auto r = two_round_pipeline(d);
    CHECK(r.round2_run == (d == 2 || d == 7));
    CHECK(r.final_box.in_simplex());

    // The box is a one-sided enclosure: a from below, b and c from above.
    const double a_star = expected::kEnvelopeComputed[d - 2][0];
    const double b_star = expected::kEnvelopeComputed[d - 2][1];
    const double c_star = expected::kEnvelopeComputed[d - 2][2];
    CHECK(to_double(r.final_box.a) <= a_star + 1e-9);
    CHECK(to_double(r.final_box.b) >= b_star - 1e-9);
    CHECK(to_double(r.final_box.c) >= c_star - 1e-9);
    // ... and at least as good as the reference final box (the round-1 c
    // bound is the g fixed point at b = 1, so the box is intentionally far
    // from c* itself at mid-range d; the reference values are the yardstick).
    CHECK(to_double(r.final_box.a) >= 0.99 * expected::kFinalBoxPrinted[0][d - 2]);
    CHECK(to_double(r.final_box.b) <= 1.01 * expected::kFinalBoxPrinted[1][d - 2]);
    CHECK(to_double(r.final_box.c) <= 1.15 * expected::kFinalBoxPrinted[2][d - 2]);

    auto rep = verify_triple_domination(d, r.final_box);
    for (const auto* f : rep.failures()) CAPTURE(f->name);
    CHECK(rep.pass());
  }
  CHECK_THROWS_AS(two_round_pipeline(8), std::invalid_argument);
}

TEST_CASE("forcing two rounds never loosens the round-1 box") {
  auto one = two_round_pipeline(4, PipelineRounds::one);
  auto two = two_round_pipeline(4, PipelineRounds::two);
  CHECK_FALSE(one.round2_run);
  CHECK(two.round2_run);
  CHECK(two.final_box.a >= one.final_box.a);
  CHECK(two.final_box.b <= one.final_box.b);
  CHECK(two.final_box.c <= one.final_box.c);
}

TEST_CASE("one-dimensional diagnostics separate d = 7 from d = 8") {
  CHECK(sign_changes_ff_minus_x(7) == 1);
  CHECK(sign_changes_ff_minus_x(8) == 3);
  CHECK(ff_slope_at_fixed_point(7) < 1.0);
  CHECK(ff_slope_at_fixed_point(8) > 1.0);

  auto grid = figure1_grid(7, 101);
  REQUIRE(grid.size() == 101);
  CHECK(grid.front().x == 0.0);
  CHECK(grid.back().x == 1.0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    CHECK(grid[k].fx < grid[k - 1].fx);  // f(1,.) is strictly decreasing
    CHECK(grid[k].fx > 0.0);
    CHECK(grid[k].fx <= 1.0);
  }
}

}  // TEST_SUITE
