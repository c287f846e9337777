// Frozen reference values used by the tests and the acceptance suite.
//
// The "printed" strings reproduce reference values embedded from the source
// material at their original precision; a value matches if it agrees to one
// unit in the last printed digit (the source truncates rather than rounds,
// so a half-unit tolerance would reject genuinely correct digits).
//
// Two cells of the ratio-map table are corrected here (marked below): the
// source text's entries are inconsistent with its own neighboring entries,
// and the corrected values are re-derived from the defining formulas.  The
// corrections are asserted through independent consistency identities, not
// merely by comparing the code against itself.
#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>

namespace liptree::expected {

// Seed used by every seeded statistical check in the acceptance suite.
inline constexpr std::uint64_t kDefaultSeed = 20260819ull;

// --- printed-precision matching ---------------------------------------------
inline double parse_printed(const char* s) { return std::strtod(s, nullptr); }

// One unit in the last printed digit: 10^(exponent - digits after the point).
inline double printed_tolerance(const char* s) {
  int digits_after_point = 0;
  bool seen_point = false;
  int exponent = 0;
  for (const char* p = s; *p; ++p) {
    if (*p == '.') {
      seen_point = true;
    } else if (*p == 'e' || *p == 'E') {
      exponent = std::atoi(p + 1);
      break;
    } else if (seen_point && std::isdigit(static_cast<unsigned char>(*p))) {
      ++digits_after_point;
    }
  }
  return std::pow(10.0, exponent - digits_after_point);
}

inline bool matches_printed(double value, const char* printed) {
  return std::abs(value - parse_printed(printed)) <= printed_tolerance(printed) * (1 + 1e-12);
}

// --- envelope-map fixed point (10^4 iterations of phi from (0, 1, .9)) ------
// columns d = 2..8
inline constexpr const char* kEnvelopeAStar[7] = {".5192", ".4374", ".3762", ".3294",
                                                  ".2932", ".2645", ".1027"};
inline constexpr const char* kEnvelopeBStar[7] = {".6335", ".4649", ".3828", ".3310",
                                                  ".2935", ".2646", ".4906"};
inline constexpr const char* kEnvelopeCStar[7] = {".1988", ".0344", ".0060", "9.5e-4",
                                                  "1.4e-4", "1.8e-5", "1.4e-4"};

// Full-precision anchors from this implementation (regression guard only).
inline constexpr double kEnvelopeComputed[7][3] = {
    {.519202, .633497, .198795},   {.437369, .464985, .0343714},
    {.376219, .382839, .00597751}, {.329428, .330974, 9.54289e-4},
    {.293152, .293535, 1.36636e-4}, {.264469, .26463, 1.757e-5},
    {.102686, .490558, 1.37737e-4}};

// --- ratio-map fixed point (10^6 iterations of psi from the zero sequence) --
// columns d = 2..7; rows x1..x4.
// The d = 6 entry of the x1 row is corrected: the source prints .2936, but
// x1 <= b* must hold and the same source gives b*(6) = .2935; converged
// iteration (checked against an independent high-precision oracle) gives
// x1 = .29335797, which rounds to .2934.
inline constexpr const char* kRatioX[4][6] = {
    {".5992", ".4555", ".3803", ".3303", ".2934", ".2646"},
    {".1712", ".0327", ".0059", "9.5e-4", "1.4e-4", "1.8e-5"},
    // d = 5 entry corrected: source prints 1.6e-16, inconsistent with its own
    // x4 = x3^d row (1.6e-16^5 = 1.0e-79, but the printed x4 is 2.5e-76).
    {".0222", "3.2e-5", "1.2e-9", "7.58422e-16", "6.4e-24", "5.1e-34"},
    {"4.7e-4", "3.2e-14", "1.8e-36", "2.5e-76", "6.8e-140", "9.1e-234"}};
inline constexpr bool kRatioXCorrected[4][6] = {
    {false, false, false, false, true, false},
    {false, false, false, false, false, false},
    {false, false, false, true, false, false},
    {false, false, false, false, false, false}};

// Final certified envelope boxes from the two-round pipeline as printed in
// the source (rows a, b, c; columns d = 2..7).  Regression yardstick only:
// our brackets use slightly different padding, so we compare with a small
// relative margin rather than digit-for-digit.
inline constexpr double kFinalBoxPrinted[3][6] = {
    {.51, .4, .3493, .307, .273, .26435},
    {.665, .55, .43, .362, .318, .26476},
    {.267, .17, .074, .0342, .0165, 3.6e-5}};

// Partial derivatives of psi at the fixed point; rows are
// -d(psi_1)/dx_1, d(psi_1)/dx_2, d(psi_2)/dx_1, d(psi_2)/dx_2.
// The d = 4 entries of the last two rows are corrected: the source prints
// 1.8e-7 and 4.6e-9 there, but direct evaluation of the closed-form partial
// derivatives at the printed fixed point gives .0446 and .0169 (the printed
// pair does not satisfy the derivative formulas by 5+ orders of magnitude).
inline constexpr const char* kRatioPartials[4][6] = {
    {".2655", ".4704", ".6213", ".7467", ".8575", ".9577"},
    {".4220", ".4234", ".4184", ".4100", ".3992", ".3874"},
    {".3357", ".1467", ".0445805", ".0108", ".0022", "3.7e-4"},
    {".1773", ".0647", ".0168534", ".0036", "6.3e-4", "9.7e-5"}};
inline constexpr bool kRatioPartialsCorrected[4][6] = {
    {false, false, false, false, false, false},
    {false, false, false, false, false, false},
    {false, false, true, false, false, false},
    {false, false, true, false, false, false}};

// Full-precision anchors from this implementation (regression guard only).
inline constexpr double kRatioXComputed[6][4] = {
    {.599211, .171159, .0221725, 4.70955e-4},
    {.455537, .0327492, 3.18902e-5, 3.24287e-14},
    {.380261, .00585905, 1.15123e-9, 1.75648e-36},
    {.330311, 9.47094e-4, 7.58422e-16, 2.50931e-76},
    {.293358, 1.36254e-4, 6.39354e-24, 6.83041e-140},
    {.264551, 1.75411e-5, 5.10907e-34, 9.08637e-234}};
inline constexpr double kRatioPartialsComputed[6][4] = {
    {.265503, .421977, .335697, .177272}, {.470386, .423366, .146672, .0646986},
    {.621279, .41837, .0445805, .0168534}, {.746716, .409978, .0107742, .00355547},
    {.857548, .399222, .00215462, 6.31989e-4},
    {.957692, .387418, 3.67034e-4, 9.70977e-5}};

// --- exhaustive enumeration oracle ------------------------------------------
struct EnumerationCase {
  int n;
  int d;
  const char* boundary;  // comma-separated leaf values
  unsigned long count;
};
inline constexpr EnumerationCase kEnumerationCases[5] = {
    {1, 2, "0", 3},
    {2, 2, "0", 19},
    {3, 2, "0", 733},
    {2, 3, "0", 45},
    {2, 2, "0,1", 214},
};
// Root-height counts for (2, 2, {0}): heights -2..2.
inline constexpr unsigned long kRootCounts_2_2_zero[5] = {1, 4, 9, 4, 1};
// Root-height counts for (2, 2, {0,1}): heights -2..3.
inline constexpr unsigned long kRootCounts_2_2_zeroone[6] = {1, 25, 81, 81, 25, 1};

}  // namespace liptree::expected
