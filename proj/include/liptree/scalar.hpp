// Scalar abstraction: every piece of the dynamics is templated on the scalar
// type S, which is either `double` (fast iteration) or `mpq_class` (exact
// big-rational arithmetic for certificates and oracles).
#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace liptree {

template <class S>
inline constexpr bool is_rational_v = false;
template <>
inline constexpr bool is_rational_v<mpq_class> = true;

// Any float-mode magnitude below this is treated as exact zero.  Iterates of
// the ratio map decay doubly exponentially, so coordinates this small are
// provably below any double subnormal within a step or two anyway.
inline constexpr double kUnderflowClamp = 1e-300;

inline double to_double(double x) { return x; }
inline double to_double(const mpq_class& x) { return x.get_d(); }

template <class S>
S from_long(long v) {
  if constexpr (is_rational_v<S>) return mpq_class(v);
  else return static_cast<double>(v);
}

template <class S>
S from_ratio(long num, long den) {
  if (den == 0) throw std::invalid_argument("from_ratio: zero denominator");
  if constexpr (is_rational_v<S>) {
    mpq_class q(num, den);
    q.canonicalize();
    return q;
  } else {
    return static_cast<double>(num) / static_cast<double>(den);
  }
}

// Exponentiation by squaring.  Used for both scalar types so that float
// results are bit-stable across runs and platforms with the same FPU
// semantics (no libm pow involved).
inline double pow_int(double base, unsigned e) {
  double r = 1.0, b = base;
  while (e) {
    if (e & 1u) r *= b;
    b *= b;
    e >>= 1u;
  }
  return r;
}

inline mpq_class pow_int(const mpq_class& base, unsigned e) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num().get_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), base.get_den().get_mpz_t(), e);
  mpq_class r(num);
  r /= mpq_class(den);
  return r;
}

inline mpz_class pow_int(const mpz_class& base, unsigned e) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), e);
  return r;
}

template <class S>
S abs_val(const S& x) {
  if constexpr (is_rational_v<S>) return abs(x);
  else return std::fabs(x);
}

// Clamp float-mode underflow to exact zero; exact mode is never clamped.
template <class S>
void clamp_underflow(S& x) {
  if constexpr (!is_rational_v<S>) {
    if (x != 0.0 && std::fabs(x) < kUnderflowClamp) x = 0.0;
  }
}

// Full-precision printing: 17 significant digits round-trips a double; exact
// values are printed as "p/q".
inline std::string to_string_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string to_string_full(const mpq_class& x) {
  return x.get_str();
}

// Short printing for report detail strings (6 significant digits).
inline std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// Parse a plain decimal literal ("0.466", "-1.5", "3") into an exact
// rational, or a "p/q" string.  Used to take certificate inputs exactly.
inline mpq_class rational_from_string(const std::string& s) {
  if (s.find('/') != std::string::npos) {
    mpq_class q(s);
    q.canonicalize();
    return q;
  }
  std::string t = s;
  bool neg = false;
  if (!t.empty() && (t[0] == '+' || t[0] == '-')) {
    neg = t[0] == '-';
    t = t.substr(1);
  }
  auto dot = t.find('.');
  std::string digits;
  size_t frac_len = 0;
  if (dot == std::string::npos) {
    digits = t;
  } else {
    digits = t.substr(0, dot) + t.substr(dot + 1);
    frac_len = t.size() - dot - 1;
  }
  if (digits.empty()) throw std::invalid_argument("rational_from_string: '" + s + "'");
  for (char c : digits)
    if (c < '0' || c > '9')
      throw std::invalid_argument("rational_from_string: '" + s + "'");
  mpz_class num(digits, 10);
  mpz_class den = 1;
  for (size_t i = 0; i < frac_len; ++i) den *= 10;
  mpq_class q(num, den);
  q.canonicalize();
  if (neg) q = -q;
  return q;
}

// Convert an exact double to the rational it represents (doubles are
// dyadic rationals, so this is lossless).
inline mpq_class rational_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite");
  mpq_class q;
  mpq_set_d(q.get_mpq_t(), x);
  return q;
}

}  // namespace liptree
