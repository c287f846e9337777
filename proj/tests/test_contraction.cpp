// Partial derivatives of psi, uniform derivative bounds, the operator-norm
// contraction certificate, and the partition certificate.
#include <doctest.h>

#include <liptree/contraction.hpp>
#include <liptree/recursion.hpp>

#include <cmath>
#include <stdexcept>

#include "expected_values.hpp"

using namespace liptree;
namespace expected = liptree::expected;
using Q = mpq_class;

namespace {
// Central finite difference of psi_n with respect to x_j.
double fd_partial(const RatioSeq<double>& x, std::size_t n, std::size_t j, int d) {
  const double h = 1e-6;
  auto shift = [&](double delta) {
    RatioSeq<double> y = x;
    if (y.entries.size() < j) y.entries.resize(j, 0.0);
    y.entries[j - 1] += delta;
    return apply_psi(y, d).at(n);
  };
  return (shift(h) - shift(-h)) / (2 * h);
}
}  // namespace

TEST_SUITE("contraction") {

TEST_CASE("closed-form partials match finite differences") {
  Rng rng = Rng::stream(expected::kDefaultSeed, 51);
  for (int d : {2, 4, 7}) {
    CAPTURE(d);
    for (int s = 0; s < 20; ++s) {
      RatioSeq<double> x;
      x.entries = {rng.uniform(0.2, 0.7), rng.uniform(0.01, 0.3),
                   rng.uniform(0.01, 0.2), rng.uniform(0.01, 0.2),
                   rng.uniform(0.01, 0.2)};
      for (std::size_t n = 1; n <= 4; ++n) {
        auto [dp, ds, dn] = psi_partials(x, n, d);
        if (n >= 2)
          CHECK(dp == doctest::Approx(fd_partial(x, n, n - 1, d)).epsilon(1e-5));
        CHECK(ds == doctest::Approx(fd_partial(x, n, n, d)).epsilon(1e-5));
        CHECK(dn == doctest::Approx(fd_partial(x, n, n + 1, d)).epsilon(1e-5));
      }
    }
  }
  CHECK_THROWS_AS(psi_partials(RatioSeq<double>::zero(), 0, 2), std::invalid_argument);
}

TEST_CASE("partials at the float fixed point match the printed table") {
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    IterateOptions opt;
    opt.stop_on_convergence = true;
    auto tr = iterate_psi(RatioSeq<double>::zero(), d, 20000, opt);
    const auto& x = tr.final_state;
    auto [z1, d11, d12] = psi_partials(x, 1, d);
    auto [d21, d22, d23] = psi_partials(x, 2, d);
    CHECK(z1 == 0.0);
    CHECK(d11 < 0.0);  // psi_1 is decreasing in x_1
    const double rows[4] = {-d11, d12, d21, d22};
    for (int r = 0; r < 4; ++r) {
      CAPTURE(r);
      CHECK(expected::matches_printed(rows[r], expected::kRatioPartials[r][d - 2]));
      CHECK(rows[r] ==
            doctest::Approx(expected::kRatioPartialsComputed[d - 2][r]).epsilon(1e-4));
    }
  }
}

TEST_CASE("dpsi_apply is the tridiagonal directional derivative") {
  RatioSeq<double> x;
  x.entries = {0.4, 0.1, 0.05, 0.02};
  const int d = 3;
  // Unit direction e_2 influences rows 1..3 only.
  std::vector<double> e2 = {0.0, 1.0, 0.0, 0.0};
  auto img = dpsi_apply(x, e2, d, 6);
  CHECK(img[0] != 0.0);
  CHECK(img[1] != 0.0);
  CHECK(img[2] != 0.0);
  CHECK(img[3] == 0.0);
  CHECK(img[4] == 0.0);

  // Linearity; and consistency with a finite difference of the full map.
  std::vector<double> y = {0.3, -0.2, 0.1, 0.05};
  auto a = dpsi_apply(x, y, d, 5);
  const double h = 1e-7;
  RatioSeq<double> xp = x, xm = x;
  for (std::size_t i = 0; i < y.size(); ++i) {
    xp.entries[i] += h * y[i];
    xm.entries[i] -= h * y[i];
  }
  auto fp = apply_psi(xp, d), fm = apply_psi(xm, d);
  for (std::size_t n = 1; n <= 5; ++n)
    CHECK(a[n - 1] == doctest::Approx((fp.at(n) - fm.at(n)) / (2 * h)).epsilon(1e-4));
}

TEST_CASE("side conditions hold at every certified triple") {
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    CHECK(side_conditions_hold(tables::certified_triple(d), d));
  }
  // A wide triple fails them (c = .9 >= 1/2).
  CHECK_FALSE(side_conditions_hold(EnvelopeTriple<Q>{Q(0), Q(1), Q(9, 10)}, 7));
  CHECK_THROWS_AS(derivative_bounds(EnvelopeTriple<Q>{Q(0), Q(1), Q(9, 10)}, 7),
                  std::invalid_argument);
}

TEST_CASE("derivative bounds are positive and compose below one") {
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    auto db = derivative_bounds(tables::certified_triple(d), d);
    CHECK(db.dpsi1_dx1 > 0);
    CHECK(db.dpsi1_dx2 > 0);
    CHECK(db.dpsin_dxnm1 > 0);
    CHECK(db.tail_dxnm1 <= db.dpsin_dxnm1);  // tail refinement only tightens
    CHECK(db.tail_dxn <= db.dpsin_dxn);
    CHECK(db.tail_dxnp1 <= db.dpsin_dxnp1);
    CHECK(opnorm_bound(db, d) < Q(99, 100));
  }
}

TEST_CASE("ceil_matches_printed rounds up to the printed digits") {
  CHECK(ceil_matches_printed(Q(372, 1000), ".38", 2));
  CHECK(ceil_matches_printed(Q(38, 100), ".38", 2));    // exact boundary
  CHECK(ceil_matches_printed(Q(3791, 10000), ".38", 2));
  CHECK_FALSE(ceil_matches_printed(Q(381, 1000), ".38", 2));  // rounds to .39
  CHECK_FALSE(ceil_matches_printed(Q(37, 100), ".38", 2));    // rounds to .37
  CHECK(ceil_matches_printed(Q(9855, 10000), ".986", 3));
}

TEST_CASE("composing the printed rounded bounds gives the reference row") {
  const double expected_rows[6] = {.96, .83, .93, .89, .98, .987};
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    auto p = tables::printed_derivative_bounds(d);
    double v = opnorm_from_rounded(
        to_double(rational_from_string(p.t11)), to_double(rational_from_string(p.t12)),
        to_double(rational_from_string(p.prev)), to_double(rational_from_string(p.self)),
        to_double(rational_from_string(p.next)), d);
    CHECK(v == doctest::Approx(expected_rows[d - 2]).epsilon(1e-9));
  }
}

TEST_CASE("contraction certificate passes for every d in 2..7") {
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    auto rep = contraction_certificate(d);
    for (const auto* f : rep.failures()) CAPTURE(f->name);
    CHECK(rep.pass());
    CHECK(!rep.notes.empty());  // the reference-row composition note
  }
  CHECK_THROWS_AS(contraction_certificate(8), std::invalid_argument);
}

TEST_CASE("psi contracts empirically at the certified rate") {
  Rng rng = Rng::stream(expected::kDefaultSeed, 52);
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    const auto t = tables::certified_triple(d);
    const EnvelopeTriple<double> tf{to_double(t.a), to_double(t.b), to_double(t.c)};
    const double rate = to_double(opnorm_bound(derivative_bounds(t, d), d));
    for (int s = 0; s < 100; ++s) {
      auto x = random_envelope_member(tf, 10, rng, rng.uniform(0.3, 1.0));
      auto y = random_envelope_member(tf, 10, rng, rng.uniform(0.3, 1.0));
      double before = to_double(delta_norm(x, y, d));
      if (before == 0.0) continue;
      double after = to_double(delta_norm(apply_psi(x, d), apply_psi(y, d), d));
      CHECK(after <= rate * before * (1 + 1e-9));
      CHECK(after <= 0.99 * before * (1 + 1e-9));
    }
  }
}

TEST_CASE("xi is decreasing and the partition certificate passes for 2..7") {
  CHECK(xi_function(Q(0), Q(47, 100), 2) > xi_function(Q(1, 10), Q(47, 100), 2));
  CHECK(xi_function(Q(1, 10), Q(47, 100), 2) > xi_function(Q(1, 2), Q(47, 100), 2));
  for (int d = 2; d <= 7; ++d) {
    CAPTURE(d);
    auto spec = PartitionSpec::builtin(d);
    auto rep = partition_certificate(spec);
    for (const auto* f : rep.failures()) CAPTURE(f->name);
    CHECK(rep.pass());
  }
  CHECK_THROWS_AS(PartitionSpec::builtin(8), std::invalid_argument);
}

TEST_CASE("partition certificate rejects bad partitions") {
  // A single cell is too coarse at d = 3.
  PartitionSpec coarse{3, tables::partition_rate(3), {{Q(0), Q(1)}}};
  auto rep = partition_certificate(coarse);
  CHECK_FALSE(rep.pass());

  // A gap in the tiling is caught.
  PartitionSpec gap = PartitionSpec::builtin(3);
  gap.cells[1].first += Q(1, 100);
  CHECK_FALSE(partition_certificate(gap).pass());

  // A decay constant below the certified bracket of the g(1,.) fixed point
  // fails the last check even when the cells are fine.
  PartitionSpec low_c = PartitionSpec::builtin(2);
  low_c.c_d = Q(40, 100);
  auto rep2 = partition_certificate(low_c);
  CHECK_FALSE(rep2.pass());
  REQUIRE(!rep2.failures().empty());
  CHECK(rep2.failures().back()->name.find("c_d exceeds") != std::string::npos);
}

}  // TEST_SUITE
