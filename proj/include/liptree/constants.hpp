// Embedded reference constants used by the certificates:
//  - the certified envelope triples (a,b,c) per degree d,
//  - the reference upper bounds on the psi partial derivatives (printed with
//    2-3 digits, rounded up),
//  - the partition of [0,1] with its decay constant c_d per degree, used by
//    the partition certificate.
#pragma once

#include <array>
#include <stdexcept>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "scalar.hpp"
#include "seqspace.hpp"

namespace liptree::tables {

using Q = mpq_class;

inline void require_d_2_to_7(int d, const char* who) {
  if (d < 2 || d > 7) throw std::invalid_argument(std::string(who) + ": d must be in 2..7");
}

// Certified envelope triples (a,b,c), one per degree (the working envelopes
// on which the contraction certificate runs).
inline liptree::EnvelopeTriple<Q> certified_triple(int d) {
  require_d_2_to_7(d, "certified_triple");
  static const std::array<std::array<const char*, 3>, 6> rows = {{
      {".5", ".7", ".27"},
      {".4", ".6", ".2"},
      {".3", ".5", ".1"},
      {".3", ".4", ".1"},
      {".27", ".32", ".1"},
      {".26", ".27", ".01"},
  }};
  const auto& r = rows[d - 2];
  return {rational_from_string(r[0]), rational_from_string(r[1]),
          rational_from_string(r[2])};
}

// Printed reference values of the derivative bounds at the certified
// triples, together with the number of printed decimal digits (they were
// rounded up to that many digits).  Order: t11, t12, prev, self, next.
struct PrintedDerivativeBounds {
  const char* t11;
  const char* t12;
  const char* prev;
  const char* self;
  const char* next;
  int digits_t11, digits_t12, digits_prev, digits_self, digits_next;
};

inline PrintedDerivativeBounds printed_derivative_bounds(int d) {
  require_d_2_to_7(d, "printed_derivative_bounds");
  static const std::array<PrintedDerivativeBounds, 6> rows = {{
      {".38", ".46", ".43", ".43", ".10", 2, 2, 2, 2, 2},
      {".57", ".51", ".26", ".21", ".04", 2, 2, 2, 2, 2},
      {".84", ".47", ".09", ".06", ".01", 2, 2, 2, 2, 2},
      {".86", ".46", ".03", ".02", ".01", 2, 2, 2, 2, 2},
      {".97", ".45", ".01", ".01", ".01", 2, 2, 2, 2, 2},
      {".986", ".401", ".001", ".001", ".001", 3, 3, 3, 3, 3},
  }};
  return rows[d - 2];
}

// Partition decay constants c_d (each exceeds the certified upper bracket of
// the fixed point c_g of g(1,.)).
inline Q partition_rate(int d) {
  require_d_2_to_7(d, "partition_rate");
  static const std::array<const char*, 6> cs = {".47", ".18", ".08",
                                                ".04", ".02", ".009"};
  return rational_from_string(cs[d - 2]);
}

// The partition of [0,1] per degree.  Cells are stored as closed intervals
// [lo, hi] whose union tiles [0,1] (consecutive cells share endpoints); the
// cell inequality is verified on closures, which only strengthens it.
inline std::vector<std::pair<Q, Q>> partition_cells(int d) {
  require_d_2_to_7(d, "partition_cells");
  static const std::array<std::vector<const char*>, 6> cuts = {{
      {"0", "1"},
      {"0", ".15", ".65", "1"},
      {"0", ".08", ".2", ".41", "1"},
      {"0", ".05", ".1", ".16", ".23", ".33", ".5", "1"},
      // Tail corrected: the source text partitions the top of [0,1] as
      // (.27,.5] u [.5,.9) u [.9,1], but its own cell criterion fails there
      // (xi(f(1,.5)) xi(.27) = 1.62, xi(f(1,.9)) xi(.5) = 1.02).  The
      // refinement .27 < .32 < .4 < .55 < 1 keeps every product below .986.
      {"0", ".04", ".08", ".11", ".13", ".16", ".19", ".23", ".27", ".32",
       ".4", ".55", "1"},
      {"0",    ".03",  ".07",  ".1",   ".12",  ".14",  ".15",  ".16",  ".17",
       ".18",  ".19",  ".2",   ".21",  ".22",  ".225", ".23",  ".238", ".245",
       ".253", ".262", ".272", ".28",  ".29",  ".3",   ".31",  ".325", ".34",
       ".365", ".4",   ".45",  ".55",  ".85",  "1"},
  }};
  const auto& c = cuts[d - 2];
  std::vector<std::pair<Q, Q>> cells;
  for (std::size_t i = 0; i + 1 < c.size(); ++i)
    cells.emplace_back(rational_from_string(c[i]), rational_from_string(c[i + 1]));
  return cells;
}

}  // namespace liptree::tables
