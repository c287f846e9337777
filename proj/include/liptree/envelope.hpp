// Scalar envelope maps f, g, i, j, the triple map phi, certified fixed-point
// brackets by exact sign checks, and the two-round estimation pipeline that
// produces a certified box around the envelope fixed point (a*, b*, c*).
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "constants.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "scalar.hpp"
#include "seqspace.hpp"

namespace liptree {

// ---------------------------------------------------------------------------
// Scalar maps.
//   f(alpha, x) = ((1 + alpha x) / (1 + 2x))^d      decreasing in x for alpha < 2
//   g(b, x)     = b^d ((1 + x + x^2)/(1 + b + bx))^d increasing in x and in b
//   i(c, x)     = f(1, f(1+c, x))                    increasing in x, decreasing in c
//   j(c, x)     = f(1+c, f(1, x))                    increasing in x and in c
// ---------------------------------------------------------------------------
template <class S>
S f_map(const S& alpha, const S& x, int d) {
  const S one = from_long<S>(1);
  S num = one + alpha * x;
  S den = one + x + x;
  return pow_int(S(num / den), d);
}

template <class S>
S g_map(const S& b, const S& x, int d) {
  const S one = from_long<S>(1);
  S num = one + x + x * x;
  S den = one + b + b * x;
  return pow_int(b, d) * pow_int(S(num / den), d);
}

template <class S>
S i_map(const S& c, const S& x, int d) {
  const S one = from_long<S>(1);
  return f_map(one, f_map(S(one + c), x, d), d);
}

template <class S>
S j_map(const S& c, const S& x, int d) {
  const S one = from_long<S>(1);
  return f_map(S(one + c), f_map(one, x, d), d);
}

// d/dx g(b,x), used for the exact slope identity dg/dx = 2d/3 at b = x = 1.
template <class S>
S g_map_dx(const S& b, const S& x, int d) {
  const S one = from_long<S>(1);
  S num = one + x + x * x;
  S den = one + b + b * x;
  S inner = (one + x + x) * den - num * b;  // (1+2x)(1+b+bx) - (1+x+x^2) b
  return from_long<S>(d) * pow_int(b, d) * pow_int(num, d - 1) * inner /
         pow_int(den, d + 1);
}

// phi(a,b,c) = (f(1,b), f(1+c,a), g(b,c)); preserves I = {a,c <= b <= 1}.
template <class S>
EnvelopeTriple<S> phi_map(const EnvelopeTriple<S>& t, int d) {
  if (!t.in_simplex())
    throw std::invalid_argument("phi_map: input triple is outside I");
  const S one = from_long<S>(1);
  EnvelopeTriple<S> out;
  out.a = f_map(one, t.b, d);
  out.b = f_map(S(one + t.c), t.a, d);
  out.c = g_map(t.b, t.c, d);
  return out;
}

// Iterate phi; returns the triple after `steps` applications.
template <class S>
EnvelopeTriple<S> iterate_phi(EnvelopeTriple<S> t, int d, std::size_t steps) {
  for (std::size_t k = 0; k < steps; ++k) t = phi_map(t, d);
  return t;
}

// Random member of S_{a,b,c}: x1 uniform in [a,b], x_n uniform in
// [0, c r^{n-2}] for n >= 2 (r <= 1 mimics the observed tail decay).
inline RatioSeq<double> random_envelope_member(const EnvelopeTriple<double>& t,
                                               std::size_t len, Rng& rng,
                                               double r = 1.0) {
  RatioSeq<double> x;
  x.entries.resize(len);
  if (len == 0) return x;
  x.entries[0] = rng.uniform(t.a, t.b);
  double scale = t.c;
  for (std::size_t n = 2; n <= len; ++n) {
    x.entries[n - 1] = rng.uniform(0.0, scale);
    scale *= r;
  }
  return x;
}

// ---------------------------------------------------------------------------
// Certified fixed-point brackets.
// All three bracketed maps are increasing in x with a unique fixed point in
// [0,1); the sign certificate map(lo) > lo, map(hi) < hi therefore pins the
// fixed point inside [lo, hi].
// ---------------------------------------------------------------------------
enum class ScalarMapId { g_of_b, i_of_c, j_of_c };

inline std::string scalar_map_name(ScalarMapId id) {
  switch (id) {
    case ScalarMapId::g_of_b: return "g(b,.)";
    case ScalarMapId::i_of_c: return "i(c,.)";
    case ScalarMapId::j_of_c: return "j(c,.)";
  }
  return "?";
}

template <class S>
S eval_scalar_map(ScalarMapId id, const S& param, const S& x, int d) {
  switch (id) {
    case ScalarMapId::g_of_b: return g_map(param, x, d);
    case ScalarMapId::i_of_c: return i_map(param, x, d);
    case ScalarMapId::j_of_c: return j_map(param, x, d);
  }
  throw std::logic_error("eval_scalar_map: bad map id");
}

struct Bracket {
  ScalarMapId map = ScalarMapId::g_of_b;
  mpq_class param;  // the frozen b (for g) or c (for i/j)
  int d = 2;
  mpq_class lo, hi;
  mpq_class residual_lo;  // map(lo) - lo, certified > 0
  mpq_class residual_hi;  // map(hi) - hi, certified < 0

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["map"] = scalar_map_name(map);
    j["param"] = to_string_full(param);
    j["d"] = d;
    j["lo"] = to_string_full(lo);
    j["hi"] = to_string_full(hi);
    j["lo_approx"] = to_double(lo);
    j["hi_approx"] = to_double(hi);
    j["residual_lo"] = to_double(residual_lo);
    j["residual_hi"] = to_double(residual_hi);
    return j;
  }
};

// Exact sign verification at the proposed endpoints; nullopt when either
// sign comes out wrong (caller re-guesses).
inline std::optional<Bracket> bracket_fixed_point(ScalarMapId id,
                                                  const mpq_class& param,
                                                  const mpq_class& lo,
                                                  const mpq_class& hi, int d) {
  if (!(lo < hi)) return std::nullopt;
  Bracket br;
  br.map = id;
  br.param = param;
  br.d = d;
  br.lo = lo;
  br.hi = hi;
  br.residual_lo = eval_scalar_map(id, param, lo, d) - lo;
  br.residual_hi = eval_scalar_map(id, param, hi, d) - hi;
  if (!(br.residual_lo > 0) || !(br.residual_hi < 0)) return std::nullopt;
  return br;
}

// Float fixed-point estimate: iterate from both ends of [0,1); the maps are
// increasing with a unique fixed point, so both orbits converge to it.
inline double scalar_fixed_point_estimate(ScalarMapId id, double param, int d) {
  auto run = [&](double x) {
    for (int k = 0; k < 1000000; ++k) {
      double y = eval_scalar_map(id, param, x, d);
      if (std::fabs(y - x) < 1e-15) return y;
      x = y;
    }
    return x;
  };
  return 0.5 * (run(0.0) + run(0.999));
}

// Locate the fixed point in float, pad by `slack` (shrunk proportionally for
// fixed points much smaller than the default pad), snap outward to decimal
// rationals fine enough to resolve the pad, and verify exactly.  On a failed
// sign check the pad widens geometrically (the float estimate was off by
// more than the pad).
inline Bracket auto_bracket(ScalarMapId id, const mpq_class& param, int d,
                            double slack = 1e-4) {
  const double est = scalar_fixed_point_estimate(id, to_double(param), d);
  double pad = std::max(std::min(slack, 0.05 * est), 1e-12);
  for (int attempt = 0; attempt < 20; ++attempt, pad *= 2) {
    int digits = static_cast<int>(std::ceil(-std::log10(pad))) + 1;
    digits = std::min(std::max(digits, 4), 15);
    long scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    long lo_num = static_cast<long>(std::floor((est - pad) * scale));
    long hi_num = static_cast<long>(std::ceil((est + pad) * scale));
    if (lo_num < 0) lo_num = 0;
    if (hi_num >= scale) hi_num = scale - 1;
    if (lo_num >= hi_num) continue;
    mpq_class lo(lo_num, scale), hi(hi_num, scale);
    lo.canonicalize();
    hi.canonicalize();
    if (auto br = bracket_fixed_point(id, param, lo, hi, d)) return *br;
  }
  throw std::runtime_error("auto_bracket: could not certify a bracket for " +
                           scalar_map_name(id) + " at d = " + std::to_string(d));
}

// ---------------------------------------------------------------------------
// Two-round estimation pipeline.
//
// Round 1 brackets the fixed point c_g of g(1,.), then a under i(c_hi,.) and
// b under j(c_hi,.).  Monotonicity gives the certified directions: the fixed
// point of i(c,.) decreases in c, so its lower end bounds a* from below; the
// fixed point of j(c,.) increases in c, so its upper end bounds b* from
// above; and c* <= c_g since g is increasing in b.
//
// Round 2 (run for d in {2,7}, where round 1 alone is too crude) forms
// b' = max(f(1+c_hi, a_lo), b_hi) and re-brackets c under g(b',.), then a, b
// under the tighter c.
//
// The final box combines the last round's bracket ends with one extra phi
// application (the odd step): a = min(a_lo, f(1,b_hi)), b = max(b_hi,
// f(1+c_hi, a_lo)), c = max(c_hi, g(b_hi, c_hi)).
// ---------------------------------------------------------------------------
struct PipelineResult {
  int d = 2;
  Bracket c1, a1, b1;
  bool round2_run = false;
  mpq_class b_prime;
  std::optional<Bracket> c2, a2, b2;
  EnvelopeTriple<mpq_class> odd_step;
  EnvelopeTriple<mpq_class> final_box;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["d"] = d;
    j["round1"] = {{"c", c1.to_json()}, {"a", a1.to_json()}, {"b", b1.to_json()}};
    if (round2_run) {
      j["b_prime"] = to_string_full(b_prime);
      j["round2"] = {{"c", c2->to_json()}, {"a", a2->to_json()}, {"b", b2->to_json()}};
    }
    auto triple = [](const EnvelopeTriple<mpq_class>& t) {
      return nlohmann::ordered_json{{"a", to_string_full(t.a)},
                                    {"b", to_string_full(t.b)},
                                    {"c", to_string_full(t.c)},
                                    {"a_approx", to_double(t.a)},
                                    {"b_approx", to_double(t.b)},
                                    {"c_approx", to_double(t.c)}};
    };
    j["odd_step"] = triple(odd_step);
    j["final_box"] = triple(final_box);
    return j;
  }
};

enum class PipelineRounds { auto_rounds, one, two };

inline PipelineResult two_round_pipeline(int d,
                                         PipelineRounds rounds = PipelineRounds::auto_rounds) {
  tables::require_d_2_to_7(d, "two_round_pipeline");
  using Q = mpq_class;
  const Q one(1);
  PipelineResult r;
  r.d = d;

  r.c1 = auto_bracket(ScalarMapId::g_of_b, one, d);
  r.a1 = auto_bracket(ScalarMapId::i_of_c, r.c1.hi, d);
  r.b1 = auto_bracket(ScalarMapId::j_of_c, r.c1.hi, d);

  bool want2 = rounds == PipelineRounds::two ||
               (rounds == PipelineRounds::auto_rounds && (d == 2 || d == 7));
  Q a_lo = r.a1.lo, b_hi = r.b1.hi, c_hi = r.c1.hi;
  if (want2) {
    r.round2_run = true;
    Q fb = f_map(Q(one + c_hi), a_lo, d);
    r.b_prime = std::max(fb, b_hi);
    r.c2 = auto_bracket(ScalarMapId::g_of_b, r.b_prime, d);
    r.a2 = auto_bracket(ScalarMapId::i_of_c, r.c2->hi, d);
    r.b2 = auto_bracket(ScalarMapId::j_of_c, r.c2->hi, d);
    a_lo = r.a2->lo;
    b_hi = r.b2->hi;
    c_hi = r.c2->hi;
  }

  r.odd_step.a = f_map(one, b_hi, d);
  r.odd_step.b = f_map(Q(one + c_hi), a_lo, d);
  r.odd_step.c = g_map(b_hi, c_hi, d);

  r.final_box.a = std::min(a_lo, r.odd_step.a);
  r.final_box.b = std::max(b_hi, r.odd_step.b);
  r.final_box.c = std::max(c_hi, r.odd_step.c);
  return r;
}

// The final box must dominate the certified working triple: a at least as
// large, b and c at least as small (so the working envelope contains the
// certified box around the fixed point).
inline CertificateReport verify_triple_domination(int d,
                                                  const EnvelopeTriple<mpq_class>& box) {
  CertificateReport rep{"pipeline box dominates certified triple, d = " +
                        std::to_string(d)};
  auto t = tables::certified_triple(d);
  rep.add("box is inside the triple simplex", box.in_simplex());
  rep.add("a_box >= a_certified", box.a >= t.a,
          fmt6(to_double(box.a)) + " vs " + fmt6(to_double(t.a)));
  rep.add("b_box <= b_certified", box.b <= t.b,
          fmt6(to_double(box.b)) + " vs " + fmt6(to_double(t.b)));
  rep.add("c_box <= c_certified", box.c <= t.c,
          fmt6(to_double(box.c)) + " vs " + fmt6(to_double(t.c)));
  return rep;
}

// ---------------------------------------------------------------------------
// One-dimensional diagnostics for the stability picture of x -> f(1,x):
// grid samples of f and f o f, sign changes of f(f(x)) - x (one crossing
// means a unique two-step fixed point; three or more reveal a period-two
// orbit), and the slope of f o f at its central fixed point.
// ---------------------------------------------------------------------------
struct Figure1Row {
  double x, fx, ffx;
};

inline std::vector<Figure1Row> figure1_grid(int d, int n = 1001) {
  std::vector<Figure1Row> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    double x = static_cast<double>(k) / (n - 1);
    double fx = f_map(1.0, x, d);
    out.push_back({x, fx, f_map(1.0, fx, d)});
  }
  return out;
}

inline int sign_changes_ff_minus_x(int d, int n = 100001) {
  int changes = 0, prev = 0;
  for (int k = 0; k < n; ++k) {
    double x = static_cast<double>(k) / (n - 1);
    double v = f_map(1.0, f_map(1.0, x, d), d) - x;
    int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
    if (s != 0) {
      if (prev != 0 && s != prev) ++changes;
      prev = s;
    }
  }
  return changes;
}

// Slope of f o f at the fixed point of f (found by bisection on f(x) - x).
inline double ff_slope_at_fixed_point(int d) {
  double lo = 0.0, hi = 1.0;
  for (int k = 0; k < 200; ++k) {
    double mid = 0.5 * (lo + hi);
    (f_map(1.0, mid, d) > mid ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi), h = 1e-7;
  auto ff = [&](double t) { return f_map(1.0, f_map(1.0, t, d), d); };
  return (ff(x + h) - ff(x - h)) / (2 * h);
}

}  // namespace liptree
