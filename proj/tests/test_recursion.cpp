// The root-marginal operator F, the conjugated ratio map psi, iteration
// traces, absorption classes, and the d >= 8 oscillation certificate.
#include <doctest.h>

#include <liptree/recursion.hpp>

#include <stdexcept>

#include "expected_values.hpp"

using namespace liptree;
namespace expected = liptree::expected;
using Q = mpq_class;

namespace {
ProbDist<Q> uniform_radius(long k) {
  ProbDist<Q> z;
  z.center = Q(1);
  z.half.assign(static_cast<std::size_t>(k), Q(1));
  z.normalize();
  return z;
}
}  // namespace

TEST_SUITE("recursion") {

TEST_CASE("F(delta0) is uniform on {-1,0,1} for every arity") {
  for (int d : {1, 2, 3, 7, 50}) {
    auto z = apply_F(ProbDist<Q>::delta0(), d);
    CHECK(z.validate());
    CHECK(z.support_radius() == 1);
    CHECK(z.center == Q(1, 3));
    CHECK(z.at(1) == Q(1, 3));
  }
}

TEST_CASE("F^2(delta0) at d = 2 matches the exhaustive height counts") {
  auto z = apply_F(apply_F(ProbDist<Q>::delta0(), 2), 2);
  // Enumerating the depth-2 binary tree with the leaves pinned to 0 gives
  // root counts (1,4,9,4,1) out of 19.
  CHECK(z.support_radius() == 2);
  CHECK(z.center == Q(expected::kRootCounts_2_2_zero[2], 19));
  CHECK(z.at(1) == Q(expected::kRootCounts_2_2_zero[3], 19));
  CHECK(z.at(2) == Q(expected::kRootCounts_2_2_zero[4], 19));
}

TEST_CASE("F on IntDist agrees with F on ProbDist for symmetric input") {
  ProbDist<Q> z = apply_F(ProbDist<Q>::delta0(), 3);
  for (int step = 0; step < 3; ++step) {
    auto zi = apply_F(to_intdist(z), 3);
    z = apply_F(z, 3);
    auto back = to_probdist(zi);
    REQUIRE(back.has_value());
    CHECK(back->center == z.center);
    CHECK(back->half == z.half);
  }
}

TEST_CASE("F rejects invalid input and reports truncation") {
  ProbDist<Q> bad;
  bad.center = Q(1, 2);
  CHECK_THROWS_AS(apply_F(bad, 2), std::invalid_argument);
  CHECK_THROWS_AS(apply_F(ProbDist<Q>::delta0(), 0), std::invalid_argument);

  ProbDist<Q> z;
  z.cap = 1;
  z.center = Q(1, 3);
  z.half = {Q(1, 3)};
  bool trunc = false;
  auto out = apply_F(z, 2, &trunc);
  CHECK(trunc);
  CHECK(out.cap == 1);
  CHECK(out.support_radius() <= 1);
  CHECK(out.center == Q(9, 17));
  CHECK(out.at(1) == Q(4, 17));
}

TEST_CASE("psi is conjugate to F: R(F^2(delta0)) = psi^2(0) exactly") {
  for (int d : {2, 3, 5}) {
    auto z2 = apply_F(apply_F(ProbDist<Q>::delta0(), d), d);
    auto lhs = ratio_transform(z2);

    auto x = apply_psi(apply_psi(RatioSeq<Q>::zero(), d), d);
    CHECK(x.at(1) == pow_int(Q(2, 3), d));
    CHECK(x.at(2) == pow_int(Q(1, 2), d));
    for (std::size_t n = 1; n <= std::max(lhs.entries.size(), x.entries.size()); ++n)
      CHECK(lhs.at(n) == x.at(n));
  }
}

TEST_CASE("psi supports grow by one per step until the cap") {
  auto x = RatioSeq<Q>::zero(4);
  for (std::size_t k = 1; k <= 4; ++k) {
    bool trunc = true;
    x = apply_psi(x, 2, &trunc);
    CHECK_FALSE(trunc);
    CHECK(x.support_len() == k);
  }
  bool trunc = false;
  x = apply_psi(x, 2, &trunc);
  CHECK(trunc);
  CHECK(x.entries.size() == 4);
  CHECK_THROWS_AS(apply_psi(x, 1), std::invalid_argument);
}

TEST_CASE("psi zeroes everything past a structural zero") {
  RatioSeq<Q> x;
  x.entries = {Q(1, 2), Q(0)};
  auto y = apply_psi(x, 2);
  // y_3 must be zero because x_2 = 0, even though the formula's other factors
  // are positive.
  CHECK(y.at(2) > 0);
  CHECK(y.at(3) == 0);
  CHECK(y.zero_tail_ok());
}

TEST_CASE("float iterate from zero converges to the printed fixed point") {
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    IterateOptions opt;
    opt.stop_on_convergence = true;
    auto tr = iterate_psi(RatioSeq<double>::zero(), d, 20000, opt);
    REQUIRE(tr.converged_at.has_value());
    CHECK(tr.steps == *tr.converged_at);
    CHECK(tr.tail_monotone);
    CHECK(tr.truncation_events.empty());  // underflow keeps the support short
    for (int coord = 0; coord < 4; ++coord) {
      CAPTURE(coord);
      double v = to_double(tr.final_state.at(static_cast<std::size_t>(coord) + 1));
      CHECK(expected::matches_printed(v, expected::kRatioX[coord][d - 2]));
      CHECK(v == doctest::Approx(expected::kRatioXComputed[d - 2][coord]).epsilon(1e-4));
    }
  }
}

TEST_CASE("iterate records rows, deltas, and truncation events") {
  // A full-support start at a small cap truncates on every step.
  RatioSeq<double> x;
  x.cap = 4;
  x.entries.assign(4, 0.9);
  std::size_t callbacks = 0;
  IterateOptions opt;
  opt.record_every = 5;
  auto tr = iterate_psi(x, 3, 20, opt,
                        StepCallback<double>(
                            [&](std::size_t, const RatioSeq<double>&, double) { ++callbacks; }));
  CHECK(tr.steps == 20);
  CHECK(callbacks == 20);
  CHECK(tr.norm_deltas.size() == 20);
  CHECK(tr.truncation_events.size() == 20);
  REQUIRE(!tr.rows.empty());
  CHECK(tr.rows.front().step == 1);
  CHECK(tr.rows.back().step == 20);
  for (const auto& row : tr.rows)
    CHECK((row.step == 1 || row.step == 20 || row.step % 5 == 0));
}

TEST_CASE("iterate does not declare convergence for d = 8") {
  auto tr = iterate_psi(RatioSeq<double>::zero(), 8, 400);
  CHECK_FALSE(tr.converged_at.has_value());
  // The deltas stay order-one: the first coordinate keeps oscillating.
  CHECK(tr.norm_deltas.back() > 0.2);
}

TEST_CASE("absorption classes are detected structurally") {
  RatioSeq<Q> zero = RatioSeq<Q>::zero();
  CHECK(absorption_class(zero) == 0);

  RatioSeq<Q> mid;
  mid.entries = {Q(1), Q(1), Q(1, 2)};
  CHECK(absorption_class(mid) == 2);

  RatioSeq<Q> all_ones;
  all_ones.entries = {Q(1), Q(1), Q(1)};
  CHECK(absorption_class(all_ones) == 3);

  RatioSeq<Q> escaped;
  escaped.entries = {Q(1), Q(3, 2)};
  CHECK_FALSE(absorption_class(escaped).has_value());
  CHECK_THROWS_AS(absorption_step(escaped, 2), std::invalid_argument);
}

TEST_CASE("one psi step drops the absorption class by exactly one") {
  // R(uniform on {-2..2}) = (1, 1, 0) sits in A_2.
  auto x = ratio_transform(uniform_radius(2));
  CHECK(absorption_class(x) == 2);
  for (int d : {2, 3, 7}) {
    CAPTURE(d);
    auto cur = x;
    long cls = 2;
    while (cls > 0) {
      auto step = absorption_step(cur, d);
      CHECK(step.input_class == cls);
      CHECK(step.output_class == cls - 1);
      CHECK(step.bound_ok);
      CHECK(step.output_tail_sup <= step.tail_bound);
      cur = step.image;
      --cls;
    }
  }
}

TEST_CASE("absorption tail bound has the closed form ((1+c+c^2)/(2+c))^d") {
  RatioSeq<Q> x;
  x.entries = {Q(1), Q(1), Q(1), Q(1, 2)};
  auto step = absorption_step(x, 2);
  CHECK(step.input_class == 3);
  CHECK(step.input_tail_sup == Q(1, 2));
  CHECK(step.tail_bound == Q(49, 100));
  CHECK(step.bound_ok);
}

TEST_CASE("oscillation certificate holds for d in 8..12") {
  for (int d = 8; d <= 12; ++d) {
    CAPTURE(d);
    auto rep = nonconvergence_certificate(d, 100);
    for (const auto* f : rep.failures()) CAPTURE(f->name);
    CHECK(rep.pass());
  }
  CHECK_THROWS_AS(nonconvergence_certificate(7), std::invalid_argument);
}

TEST_CASE("oscillation certificate records the parity-label correction") {
  auto rep = nonconvergence_certificate(8, 10);
  REQUIRE(!rep.notes.empty());
  CHECK(rep.notes.front().find("label correction") != std::string::npos);
  // The corrected assignment: odd iterates carry the large band.
  auto x = apply_psi(RatioSeq<Q>::zero(), 8);
  CHECK(x.at(1) == 1);
  x = apply_psi(x, 8);
  CHECK(x.at(1) == pow_int(Q(2, 3), 8));
  CHECK(x.at(1) < Q(7, 50));
}

}  // TEST_SUITE
