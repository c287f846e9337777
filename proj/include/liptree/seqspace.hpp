// Core state spaces:
//   ProbDist  — symmetric probability distributions on Z with interval
//               support (the root-marginal state space).  Symmetry is
//               structural: only the center mass and one half are stored, so
//               asymmetric float noise cannot exist by construction.
//   IntDist   — general finitely-supported distributions on Z (needed for
//               asymmetric boundary sets such as {0,1}).
//   RatioSeq  — sequences of consecutive-mass ratios x_i = z_i / z_{i-1}.
//   WeightSeq — flat-then-geometrically-decaying leaf weights.
//   EnvelopeTriple — (a,b,c) parameters of the envelope set S_{a,b,c}.
#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalar.hpp"

namespace liptree {

inline constexpr std::size_t kDefaultTruncation = 64;

// ---------------------------------------------------------------------------
// ProbDist: value(i) = value(-i); value(0) = center; value(i) = half[i-1].
// ---------------------------------------------------------------------------
template <class S>
struct ProbDist {
  S center{};
  std::vector<S> half;  // masses at +1, +2, ...
  std::size_t cap = kDefaultTruncation;  // maximum support radius

  static ProbDist delta0() {
    ProbDist z;
    z.center = from_long<S>(1);
    return z;
  }

  long support_radius() const { return static_cast<long>(half.size()); }

  S at(long i) const {
    if (i < 0) i = -i;
    if (i == 0) return center;
    if (static_cast<std::size_t>(i) <= half.size()) return half[i - 1];
    return S{};
  }

  void trim() {
    while (!half.empty() && half.back() == 0) half.pop_back();
  }

  S total() const {
    S t = center;
    for (const auto& v : half) t += v + v;
    return t;
  }

  void normalize() {
    S t = total();
    if (t == 0) throw std::domain_error("ProbDist::normalize: zero mass");
    center /= t;
    for (auto& v : half) v /= t;
  }

  // Invariants: center > 0, all masses >= 0, interval support (no internal
  // zeros), normalization (exact in rational mode, 1e-9 in float mode).
  bool validate(std::string* why = nullptr) const {
    auto fail = [&](const std::string& m) {
      if (why) *why = m;
      return false;
    };
    if (!(center > 0)) return fail("center mass must be positive");
    bool seen_zero = false;
    for (std::size_t i = 0; i < half.size(); ++i) {
      if (half[i] < 0) return fail("negative mass at index " + std::to_string(i + 1));
      if (half[i] == 0) {
        seen_zero = true;
      } else if (seen_zero) {
        return fail("support is not an interval (gap before index " +
                    std::to_string(i + 1) + ")");
      }
    }
    S t = total();
    if constexpr (is_rational_v<S>) {
      if (t != 1) return fail("not normalized (total " + to_string_full(t) + ")");
    } else {
      if (std::fabs(to_double(t) - 1.0) > 1e-9)
        return fail("not normalized (total " + to_string_full(t) + ")");
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// IntDist: general distribution with support in [lo, lo + v.size() - 1].
// ---------------------------------------------------------------------------
template <class S>
struct IntDist {
  long lo = 0;
  std::vector<S> v;

  long hi() const { return lo + static_cast<long>(v.size()) - 1; }

  S at(long i) const {
    if (i < lo || i > hi()) return S{};
    return v[i - lo];
  }

  S total() const {
    S t{};
    for (const auto& x : v) t += x;
    return t;
  }

  void normalize() {
    S t = total();
    if (t == 0) throw std::domain_error("IntDist::normalize: zero mass");
    for (auto& x : v) x /= t;
  }

  void trim() {
    std::size_t a = 0, b = v.size();
    while (a < b && v[a] == 0) ++a;
    while (b > a && v[b - 1] == 0) --b;
    lo += static_cast<long>(a);
    v = std::vector<S>(v.begin() + a, v.begin() + b);
  }
};

template <class S>
IntDist<S> to_intdist(const ProbDist<S>& z) {
  IntDist<S> d;
  long k = z.support_radius();
  d.lo = -k;
  d.v.resize(2 * k + 1);
  for (long i = -k; i <= k; ++i) d.v[i + k] = z.at(i);
  return d;
}

// Succeeds only if the distribution is symmetric about 0.
template <class S>
std::optional<ProbDist<S>> to_probdist(const IntDist<S>& d) {
  long k = std::max(std::labs(d.lo), std::labs(d.hi()));
  for (long i = 1; i <= k; ++i)
    if (!(d.at(i) == d.at(-i))) return std::nullopt;
  ProbDist<S> z;
  z.center = d.at(0);
  z.half.resize(k);
  for (long i = 1; i <= k; ++i) z.half[i - 1] = d.at(i);
  z.trim();
  if (!(z.center > 0)) return std::nullopt;
  return z;
}

// ---------------------------------------------------------------------------
// RatioSeq: entries[i] holds x_{i+1}; `cap` is the truncation length L.
// ---------------------------------------------------------------------------
template <class S>
struct RatioSeq {
  std::vector<S> entries;
  std::size_t cap = kDefaultTruncation;

  static RatioSeq zero(std::size_t cap = kDefaultTruncation) {
    RatioSeq x;
    x.cap = cap;
    return x;
  }

  S at(std::size_t n) const {  // 1-based coordinate x_n
    if (n == 0 || n > entries.size()) return S{};
    return entries[n - 1];
  }

  std::size_t support_len() const {  // largest n with x_n != 0
    std::size_t m = entries.size();
    while (m > 0 && entries[m - 1] == 0) --m;
    return m;
  }

  void trim() { entries.resize(support_len()); }

  bool zero_tail_ok() const {
    bool seen_zero = false;
    for (const auto& e : entries) {
      if (e == 0) seen_zero = true;
      else if (seen_zero) return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// EnvelopeTriple: S_{a,b,c} = { x : a <= x_1 <= b, x_n <= c for n >= 2 }.
// ---------------------------------------------------------------------------
template <class S>
struct EnvelopeTriple {
  S a{}, b{}, c{};

  // Membership in the parameter simplex: 0 <= a, c <= b <= 1.
  bool in_simplex() const {
    return a >= 0 && c >= 0 && a <= b && c <= b && b <= from_long<S>(1);
  }
};

template <class S>
bool envelope_contains(const EnvelopeTriple<S>& t, const RatioSeq<S>& x) {
  if (x.at(1) < t.a || x.at(1) > t.b) return false;
  for (std::size_t n = 2; n <= x.entries.size(); ++n)
    if (x.at(n) > t.c) return false;
  return true;
}

// ---------------------------------------------------------------------------
// WeightSeq: w(i) = w(0) for |i| <= flat_radius, then w(flat_radius + 1 + j)
// = tail[j], with tail decaying at rate <= decay_rate < 1.
// ---------------------------------------------------------------------------
template <class S>
struct WeightSeq {
  long flat_radius = 0;
  S decay_rate{};
  std::vector<S> tail;
  S flat_value = from_long<S>(1);  // scale is irrelevant after normalization
};

template <class S>
struct GoodWeightResult {
  bool ok = false;
  std::string why;
  ProbDist<S> normalized;
};

template <class S>
GoodWeightResult<S> is_good_weight(const WeightSeq<S>& w) {
  GoodWeightResult<S> r;
  if (!(w.flat_value > 0)) {
    r.why = "w(0) must be positive";
    return r;
  }
  if (w.flat_radius < 0) {
    r.why = "flat radius must be >= 0";
    return r;
  }
  if (w.decay_rate < 0 || w.decay_rate >= 1) {
    r.why = "decay rate must lie in [0,1)";
    return r;
  }
  S prev = w.flat_value;
  for (std::size_t j = 0; j < w.tail.size(); ++j) {
    if (w.tail[j] < 0) {
      r.why = "negative tail weight at offset " + std::to_string(j);
      return r;
    }
    if (w.tail[j] > w.decay_rate * prev) {
      r.why = "tail does not decay at the declared rate at offset " + std::to_string(j);
      return r;
    }
    prev = w.tail[j];
  }
  r.ok = true;
  r.normalized.center = w.flat_value;
  r.normalized.half.assign(static_cast<std::size_t>(w.flat_radius), w.flat_value);
  for (const auto& t : w.tail) r.normalized.half.push_back(t);
  r.normalized.trim();
  r.normalized.normalize();
  return r;
}

// ---------------------------------------------------------------------------
// Ratio transform R and its inverse.
// ---------------------------------------------------------------------------
template <class S>
RatioSeq<S> ratio_transform(const ProbDist<S>& z,
                            std::size_t cap = kDefaultTruncation) {
  std::string why;
  if (!z.validate(&why))
    throw std::invalid_argument("ratio_transform: invalid input: " + why);
  RatioSeq<S> x;
  x.cap = cap;
  const long k = z.support_radius();
  // Entries up to the support length plus one (the first structural zero).
  const std::size_t len = std::min<std::size_t>(cap, static_cast<std::size_t>(k) + 1);
  x.entries.resize(len);
  for (std::size_t n = 1; n <= len; ++n) {
    S prev = z.at(static_cast<long>(n) - 1);
    if (prev == 0) {
      x.entries[n - 1] = S{};
    } else {
      x.entries[n - 1] = z.at(static_cast<long>(n)) / prev;
    }
  }
  return x;
}

template <class S>
ProbDist<S> inverse_ratio_transform(const RatioSeq<S>& x) {
  // Partial products p_i = x_1 ... x_i give the unnormalized masses; the
  // center mass is fixed by z0 (1 + 2 sum p_i) = 1.
  ProbDist<S> z;
  z.cap = x.cap;
  S p = from_long<S>(1);
  S sum{};
  std::vector<S> prods;
  for (std::size_t n = 1; n <= x.entries.size(); ++n) {
    if (x.at(n) == 0) break;
    p *= x.at(n);
    clamp_underflow(p);
    if (p == 0) break;
    prods.push_back(p);
    sum += p;
    if constexpr (!is_rational_v<S>) {
      if (!std::isfinite(to_double(sum)))
        throw std::domain_error(
            "inverse_ratio_transform: partial products diverge (not "
            "normalizable at this truncation)");
    }
  }
  S denom = from_long<S>(1) + sum + sum;
  z.center = from_long<S>(1) / denom;
  z.half.resize(prods.size());
  for (std::size_t i = 0; i < prods.size(); ++i) z.half[i] = prods[i] * z.center;
  z.trim();
  return z;
}

// ---------------------------------------------------------------------------
// The modified norm: plain sup-norm for d = 2 (and d >= 8, diagnostics only);
// |x_1| + sup_{i>=2} |x_i| for 3 <= d <= 7.
// ---------------------------------------------------------------------------
template <class S>
S norm_modified(const std::vector<S>& v, int d) {
  if (v.empty()) return S{};
  auto sup_from = [&](std::size_t start) {
    S m{};
    for (std::size_t i = start; i < v.size(); ++i) {
      S a = abs_val(v[i]);
      if (a > m) m = a;
    }
    return m;
  };
  if (d >= 3 && d <= 7) return abs_val(v[0]) + sup_from(1);
  return sup_from(0);
}

template <class S>
S norm_modified(const RatioSeq<S>& x, int d) {
  return norm_modified(x.entries, d);
}

// Norm of the difference of two ratio sequences (zero-padded).
template <class S>
S delta_norm(const RatioSeq<S>& a, const RatioSeq<S>& b, int d) {
  std::size_t n = std::max(a.entries.size(), b.entries.size());
  std::vector<S> diff(n);
  for (std::size_t i = 1; i <= n; ++i) diff[i - 1] = a.at(i) - b.at(i);
  return norm_modified(diff, d);
}

// ---------------------------------------------------------------------------
// Total variation distances.
// ---------------------------------------------------------------------------
template <class S>
S tv_distance(const ProbDist<S>& p, const ProbDist<S>& q) {
  S s = abs_val(S(p.center - q.center));
  long k = std::max(p.support_radius(), q.support_radius());
  for (long i = 1; i <= k; ++i) {
    S d = abs_val(S(p.at(i) - q.at(i)));
    s += d + d;
  }
  return s / from_long<S>(2);
}

template <class S>
S tv_distance(const IntDist<S>& p, const IntDist<S>& q) {
  long lo = std::min(p.lo, q.lo), hi = std::max(p.hi(), q.hi());
  S s{};
  for (long i = lo; i <= hi; ++i) s += abs_val(S(p.at(i) - q.at(i)));
  return s / from_long<S>(2);
}

}  // namespace liptree
