// The root-marginal operator F, the ratio-conjugated map psi, iteration
// drivers with convergence detection, absorption-class dynamics, and the
// oscillation certificate for d >= 8.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <gmpxx.h>

#include "report.hpp"
#include "rng.hpp"
#include "scalar.hpp"
#include "seqspace.hpp"

namespace liptree {

// ---------------------------------------------------------------------------
// F: z -> normalize(A(z)) with A(z)_i = (z_{i-1} + z_i + z_{i+1})^arity.
// The arity equals the number of children of the vertex being folded into.
// ---------------------------------------------------------------------------
template <class S>
ProbDist<S> apply_F(const ProbDist<S>& z, int arity, bool* truncated = nullptr) {
  std::string why;
  if (!z.validate(&why)) throw std::invalid_argument("apply_F: invalid input: " + why);
  if (arity < 1) throw std::invalid_argument("apply_F: arity must be >= 1");
  const long k = z.support_radius();
  long nk = k + 1;
  bool trunc = false;
  if (static_cast<std::size_t>(nk) > z.cap) {
    nk = static_cast<long>(z.cap);
    trunc = true;
  }
  if (truncated) *truncated = trunc;
  ProbDist<S> out;
  out.cap = z.cap;
  out.center = pow_int(S(z.at(-1) + z.at(0) + z.at(1)), arity);
  out.half.resize(nk);
  for (long i = 1; i <= nk; ++i) {
    S s = z.at(i - 1) + z.at(i) + z.at(i + 1);
    out.half[i - 1] = pow_int(s, arity);
    clamp_underflow(out.half[i - 1]);
  }
  out.trim();
  out.normalize();
  return out;
}

template <class S>
IntDist<S> apply_F(const IntDist<S>& z, int arity) {
  if (arity < 1) throw std::invalid_argument("apply_F: arity must be >= 1");
  IntDist<S> out;
  out.lo = z.lo - 1;
  out.v.resize(z.v.size() + 2);
  for (long i = out.lo; i <= out.hi(); ++i) {
    S s = z.at(i - 1) + z.at(i) + z.at(i + 1);
    out.v[i - out.lo] = pow_int(s, arity);
    clamp_underflow(out.v[i - out.lo]);
  }
  out.trim();
  out.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// psi = R o F o R^{-1}:
//   psi_1(x) = ((1 + x1 + x1 x2) / (1 + 2 x1))^d
//   psi_n(x) = x_{n-1}^d ((1 + x_n + x_n x_{n+1}) / (1 + x_{n-1} + x_{n-1} x_n))^d
// for n >= 2, with psi_n = 0 whenever x_{n-1} = 0.  Support grows by one
// entry per application until the cap L is hit (a truncation event).
// ---------------------------------------------------------------------------
template <class S>
RatioSeq<S> apply_psi(const RatioSeq<S>& x, int d, bool* truncated = nullptr) {
  if (d < 2) throw std::invalid_argument("apply_psi: d must be >= 2");
  const S one = from_long<S>(1);
  const std::size_t m = x.support_len();
  std::size_t out_len = m + 1;
  bool trunc = false;
  if (out_len > x.cap) {
    out_len = x.cap;
    trunc = true;
  }
  if (truncated) *truncated = trunc;

  RatioSeq<S> y;
  y.cap = x.cap;
  y.entries.resize(out_len);
  {
    S x1 = x.at(1), x2 = x.at(2);
    S num = one + x1 + x1 * x2;
    S den = one + x1 + x1;
    y.entries[0] = pow_int(S(num / den), d);
  }
  for (std::size_t n = 2; n <= out_len; ++n) {
    S xp = x.at(n - 1);
    if (xp == 0) {
      y.entries[n - 1] = S{};
      continue;
    }
    S xn = x.at(n), xq = x.at(n + 1);
    S num = one + xn + xn * xq;
    S den = one + xp + xp * xn;
    y.entries[n - 1] = pow_int(xp, d) * pow_int(S(num / den), d);
    clamp_underflow(y.entries[n - 1]);
  }
  // Underflow clamping may zero an interior entry; restore the zero-tail
  // invariant (everything past the first zero is dynamically dead anyway).
  bool dead = false;
  for (auto& e : y.entries) {
    if (dead) e = S{};
    else if (e == 0) dead = true;
  }
  y.trim();
  return y;
}

// ---------------------------------------------------------------------------
// Iteration driver.
// ---------------------------------------------------------------------------
template <class S>
struct TraceRow {
  std::size_t step = 0;
  std::array<double, 8> x{};  // first eight coordinates
  double delta = 0.0;
};

template <class S>
struct IterationTrace {
  std::vector<double> norm_deltas;        // one entry per step taken
  std::vector<TraceRow<S>> rows;          // thinned summaries
  std::vector<std::size_t> truncation_events;
  std::optional<std::size_t> converged_at;
  RatioSeq<S> final_state;
  std::size_t steps = 0;
  bool tail_monotone = true;  // soft diagnostic: x2 >= x3 >= ... at every step
};

struct IterateOptions {
  std::size_t record_every = 0;  // 0 = auto (about 1000 rows)
  double tol = 1e-13;
  int window = 10;               // consecutive small deltas to declare convergence
  bool stop_on_convergence = false;
};

template <class S>
using StepCallback = std::function<void(std::size_t, const RatioSeq<S>&, double)>;

template <class S>
IterationTrace<S> iterate_psi(RatioSeq<S> x, int d, std::size_t steps,
                              IterateOptions opt = {},
                              const StepCallback<S>& on_step = nullptr) {
  if (steps < 1) throw std::invalid_argument("iterate_psi: steps must be >= 1");
  IterationTrace<S> tr;
  tr.norm_deltas.reserve(steps);
  std::size_t every = opt.record_every ? opt.record_every
                                       : std::max<std::size_t>(1, steps / 1000);
  int streak = 0;
  auto record_row = [&](std::size_t step, const RatioSeq<S>& s, double delta) {
    TraceRow<S> row;
    row.step = step;
    for (std::size_t i = 0; i < 8; ++i) row.x[i] = to_double(s.at(i + 1));
    row.delta = delta;
    tr.rows.push_back(row);
  };
  for (std::size_t k = 1; k <= steps; ++k) {
    bool trunc = false;
    RatioSeq<S> y = apply_psi(x, d, &trunc);
    if (trunc) tr.truncation_events.push_back(k);
    double delta = to_double(delta_norm(y, x, d));
    tr.norm_deltas.push_back(delta);
    for (std::size_t n = 3; n <= y.support_len(); ++n)
      if (y.at(n) > y.at(n - 1)) tr.tail_monotone = false;
    x = std::move(y);
    if (on_step) on_step(k, x, delta);
    if (k % every == 0 || k == steps || k == 1) record_row(k, x, delta);
    if (delta < opt.tol) {
      if (++streak >= opt.window && !tr.converged_at) {
        tr.converged_at = k;
        if (opt.stop_on_convergence) {
          tr.steps = k;
          tr.final_state = std::move(x);
          return tr;
        }
      }
    } else {
      streak = 0;
    }
  }
  tr.steps = steps;
  tr.final_state = std::move(x);
  return tr;
}

// ---------------------------------------------------------------------------
// Absorption classes A_k = { x : x_i = 1 for i <= k, sup_{i>k} x_i < 1 }.
// ---------------------------------------------------------------------------
template <class S>
std::optional<long> absorption_class(const RatioSeq<S>& x) {
  const S one = from_long<S>(1);
  std::size_t k = 0;
  while (k < x.entries.size() && x.entries[k] == one) ++k;
  for (std::size_t i = k; i < x.entries.size(); ++i)
    if (x.entries[i] >= one) return std::nullopt;
  return static_cast<long>(k);
}

template <class S>
struct AbsorptionStep {
  RatioSeq<S> image;
  long input_class = 0;
  long output_class = 0;
  S input_tail_sup{};   // sup over entries beyond the flat prefix
  S tail_bound{};       // ((1+c+c^2)/(2+c))^d with c = input_tail_sup
  S output_tail_sup{};  // sup of image entries at indices > input_class
  bool bound_ok = false;
};

// One psi step on a sequence in some A_k.  The class drops by exactly one
// while k >= 1 and the image entries strictly beyond the old flat prefix are
// bounded by ((1+c+c^2)/(2+c))^d.  (At index k itself the image is only
// bounded by ((2+c)/3)^d, so the uniform tail bound applies from k+1 on.)
template <class S>
AbsorptionStep<S> absorption_step(const RatioSeq<S>& x, int d) {
  auto cls = absorption_class(x);
  if (!cls) throw std::invalid_argument("absorption_step: input is not in any A_k");
  AbsorptionStep<S> r;
  r.input_class = *cls;
  for (std::size_t i = static_cast<std::size_t>(*cls); i < x.entries.size(); ++i)
    if (x.entries[i] > r.input_tail_sup) r.input_tail_sup = x.entries[i];
  const S one = from_long<S>(1);
  const S c = r.input_tail_sup;
  r.tail_bound = pow_int(S((one + c + c * c) / (from_long<S>(2) + c)), d);
  r.image = apply_psi(x, d);
  auto out_cls = absorption_class(r.image);
  if (!out_cls)
    throw std::logic_error("absorption_step: image left the absorption classes");
  r.output_class = *out_cls;
  r.bound_ok = true;
  for (std::size_t n = static_cast<std::size_t>(r.input_class) + 1;
       n <= r.image.entries.size(); ++n) {
    S v = r.image.at(n);
    if (v > r.output_tail_sup) r.output_tail_sup = v;
    if (v > r.tail_bound) r.bound_ok = false;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Oscillation certificate for d >= 8: with a = 2/5, c = 1/100 and
// a' = (39/50)^d, the first coordinate of the psi iterates from the zero
// sequence alternates between [2/5, 1] and [0, 7/50] forever, so the iterates
// cannot converge.  All inequalities are decided in exact rational
// arithmetic; the observed bands are additionally checked in float mode up
// to the requested horizon.
//
// Note: the source statement attaches the large band to even iterates; in
// fact psi(0)_1 = 1 and psi^(2)(0)_1 = (2/3)^d, so odd iterates are the
// large ones.  The certificate records this label correction.
// ---------------------------------------------------------------------------
inline CertificateReport nonconvergence_certificate(int d, std::size_t horizon = 200) {
  if (d < 8) throw std::invalid_argument("nonconvergence_certificate: requires d >= 8");
  using Q = mpq_class;
  CertificateReport rep{"non-convergence certificate, d = " + std::to_string(d)};
  const Q a(2, 5), c(1, 100), one(1);

  // (i) tail contraction: c' = ((1+c+c^2)/(2+c))^d < c.
  Q cprime = pow_int(Q((one + c + c * c) / (Q(2) + c)), d);
  rep.add("tail bound c' = ((1+c+c^2)/(2+c))^d < c", cprime < c,
          "c' = " + fmt6(to_double(cprime)));
  if (d == 8)
    rep.add("d=8 tail bound decimal prefix: c' <= 0.0040677",
            cprime <= from_ratio<Q>(40677, 10000000),
            "exact comparison against 40677/10^7");

  // (ii) one-step cap on the first coordinate from the band [a, 1]:
  // sup over S_{a,1,c} of psi_1 is attained at x1 = a, x2 = c (psi_1 is
  // decreasing in x1 and increasing in x2), and equals a' = (39/50)^d.
  Q corner = pow_int(Q((one + a * (one + c)) / (one + a + a)), d);
  Q aprime = pow_int(Q(39, 50), d);
  rep.add("corner value (1+a(1+c))^d/(1+2a)^d equals (39/50)^d", corner == aprime,
          "exact identity at a = 2/5, c = 1/100");
  rep.add("a' = (39/50)^d <= 7/50", aprime <= Q(7, 50),
          "a' = " + fmt6(to_double(aprime)));

  // (iii) return to the large band: gamma(d) = ((1+a')/(1+2a'))^d > 2/5.
  Q gamma = pow_int(Q((one + aprime) / (one + aprime + aprime)), d);
  rep.add("gamma(d) = ((1+a')/(1+2a'))^d > 2/5", gamma > Q(2, 5),
          "gamma = " + fmt6(to_double(gamma)) + ", exact comparison");
  if (d == 8)
    rep.add("gamma(8) has decimal prefix .402",
            gamma >= from_ratio<Q>(402, 1000) && gamma < from_ratio<Q>(403, 1000), "exact bracketing");
  if (d == 9)
    rep.add("gamma(9) has decimal prefix .436",
            gamma >= from_ratio<Q>(436, 1000) && gamma < from_ratio<Q>(437, 1000), "exact bracketing");
  if (d >= 10) {
    // The closed-form route: gamma(d) >= exp(-d a') because
    // (1+u)/(1+2u) >= 1/(1+u) and ln(1+u) <= u; then exp(-d a') > 2/5
    // whenever d a' <= 229/250 = .916 < ln(5/2) = .91629...  Only the last
    // comparison involves a transcendental constant; the premise is exact.
    Q da = Q(d) * aprime;
    rep.add("exponential-bound premise d (39/50)^d <= 229/250", da <= Q(229, 250),
            "d a' = " + fmt6(to_double(da)) +
                "; .916 < ln(5/2) = .91629... closes the bound");
  }

  // (iv) observed parity bands from the zero start (float mode).
  {
    RatioSeq<double> x = RatioSeq<double>::zero();
    bool odd_ok = true, even_ok = true;
    std::size_t first_bad = 0;
    const std::size_t last = 2 * horizon + 1;
    for (std::size_t k = 1; k <= last; ++k) {
      x = apply_psi(x, d);
      double x1 = x.at(1);
      if (k % 2 == 1 && x1 < 0.4) { odd_ok = false; if (!first_bad) first_bad = k; }
      if (k % 2 == 0 && k >= 2 && x1 > 0.14) { even_ok = false; if (!first_bad) first_bad = k; }
    }
    std::string det = "horizon " + std::to_string(last) + " iterations";
    if (first_bad) det += ", first violation at step " + std::to_string(first_bad);
    rep.add("odd iterates have x1 >= 2/5 up to the horizon", odd_ok, det);
    rep.add("even iterates (k >= 2) have x1 <= 7/50 up to the horizon", even_ok, det);
  }
  rep.note(
      "label correction: the source text assigns the large band to even "
      "iterates, but psi(0)_1 = 1 and psi^(2)(0)_1 = (2/3)^d, so odd iterates "
      "carry the large band; the alternation itself is as claimed.");
  return rep;
}

}  // namespace liptree
