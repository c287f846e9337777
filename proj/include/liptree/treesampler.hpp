// Exact enumeration and exact sampling of uniform Lipschitz functions on
// finite d-ary trees, the limiting tree-indexed Markov chain, and stochastic
// domination checks between boundary conditions.
//
// Tree convention: T_d^n has a root with d children and every internal
// vertex has d children; leaves sit at depth n.  The `regular` flavor gives
// the root d+1 children instead (one extra subtree), matching the root of
// the (d+1)-regular infinite tree.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include <boost/math/distributions/chi_squared.hpp>

#include "recursion.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "scalar.hpp"
#include "seqspace.hpp"

namespace liptree {

// ---------------------------------------------------------------------------
// Brute-force oracle: exhaustively enumerate Lipschitz functions with leaf
// values constrained to `boundary`, by depth-first assignment over vertices
// in breadth-first order.  Completely independent of the F-recursion.
// ---------------------------------------------------------------------------
struct EnumerationResult {
  mpz_class count;              // number of admissible functions
  IntDist<mpz_class> root_counts;  // functions per root height
  IntDist<mpq_class> root_marginal() const {
    IntDist<mpq_class> m;
    m.lo = root_counts.lo;
    m.v.assign(root_counts.v.size(), mpq_class(0));
    for (std::size_t i = 0; i < root_counts.v.size(); ++i)
      m.v[i] = mpq_class(root_counts.v[i]);
    m.normalize();
    return m;
  }
};

inline EnumerationResult enumerate_lipschitz(int n, int d,
                                             const std::vector<long>& boundary,
                                             double budget = 1e8) {
  if (n < 1 || d < 1) throw std::invalid_argument("enumerate_lipschitz: need n, d >= 1");
  if (boundary.empty())
    throw std::invalid_argument("enumerate_lipschitz: empty boundary set");

  // Vertices in BFS order; parent(v) = (v - 1) / d.
  std::size_t total = 0, level_size = 1;
  std::vector<std::size_t> level_start(n + 2);
  for (int k = 0; k <= n; ++k) {
    level_start[k] = total;
    total += level_size;
    level_size *= d;
  }
  level_start[n + 1] = total;

  long leaves_states = static_cast<long>(boundary.size());
  double worst = 1.0;
  for (std::size_t v = 0; v < total; ++v)
    worst *= (v >= level_start[n]) ? leaves_states : 3.0;
  // The root actually ranges over a window, but the DFS prunes; this crude
  // bound is only a guard against absurd instances.
  if (worst > budget)
    throw std::invalid_argument("enumerate_lipschitz: instance exceeds enumeration budget");

  long bmin = boundary[0], bmax = boundary[0];
  for (long s : boundary) {
    bmin = std::min(bmin, s);
    bmax = std::max(bmax, s);
  }
  std::vector<bool> in_boundary(static_cast<std::size_t>(bmax - bmin + 1));
  for (long s : boundary) in_boundary[s - bmin] = true;

  EnumerationResult res;
  res.count = 0;
  const long root_lo = bmin - n, root_hi = bmax + n;
  res.root_counts.lo = root_lo;
  res.root_counts.v.assign(static_cast<std::size_t>(root_hi - root_lo + 1), mpz_class(0));

  std::vector<long> h(total);
  auto is_leaf = [&](std::size_t v) { return v >= level_start[n]; };
  auto admissible_leaf = [&](long x) {
    return x >= bmin && x <= bmax && in_boundary[x - bmin];
  };

  auto dfs = [&](auto&& self, std::size_t v) -> void {
    long lo, hi;
    if (v == 0) {
      lo = root_lo;
      hi = root_hi;
    } else {
      long p = h[(v - 1) / d];
      lo = p - 1;
      hi = p + 1;
    }
    for (long x = lo; x <= hi; ++x) {
      if (is_leaf(v) && !admissible_leaf(x)) continue;
      h[v] = x;
      if (v + 1 == total) {
        res.count += 1;
        res.root_counts.v[h[0] - root_lo] += 1;
      } else {
        self(self, v + 1);
      }
    }
  };
  dfs(dfs, 0);
  res.root_counts.trim();
  return res;
}

// ---------------------------------------------------------------------------
// Root marginals through the F-recursion.
// ---------------------------------------------------------------------------
template <class S>
ProbDist<S> root_marginal(int n, int d, const ProbDist<S>& w, bool regular = false,
                          std::size_t* truncations = nullptr) {
  if (n < 1) throw std::invalid_argument("root_marginal: n must be >= 1");
  ProbDist<S> z = w;
  std::size_t events = 0;
  for (int k = 0; k < n - 1; ++k) {
    bool tr = false;
    z = apply_F(z, d, &tr);
    events += tr;
  }
  bool tr = false;
  z = apply_F(z, regular ? d + 1 : d, &tr);
  events += tr;
  if (truncations) *truncations = events;
  return z;
}

template <class S>
IntDist<S> root_marginal_general(int n, int d, IntDist<S> w, bool regular = false) {
  if (n < 1) throw std::invalid_argument("root_marginal_general: n must be >= 1");
  for (int k = 0; k < n - 1; ++k) w = apply_F(w, d);
  return apply_F(w, regular ? d + 1 : d);
}

// ---------------------------------------------------------------------------
// Exact sampler: unnormalized integer level weights G_k (bottom-up), then
// top-down conditional draws.  G_n = boundary weights; G_k(h) =
// (G_{k+1}(h-1) + G_{k+1}(h) + G_{k+1}(h+1))^d; the root uses exponent d
// (or d+1 in the regular flavor).  Each level is reduced by its gcd, which
// leaves all conditional ratios (and the root law) unchanged.
// ---------------------------------------------------------------------------
struct VertexId {
  int level = 0;       // 0 = root
  std::uint64_t index = 0;  // BFS index within the level

  bool operator<(const VertexId& o) const {
    return level != o.level ? level < o.level : index < o.index;
  }
  bool operator==(const VertexId& o) const {
    return level == o.level && index == o.index;
  }
};

struct TreeLipschitzSample {
  int n = 0, d = 2;
  std::map<VertexId, long> height_by_vertex;
  bool full = false;  // all d^n leaves materialized?
};

class TreeSampler {
 public:
  // boundary: exact nonnegative integer weights on leaf heights.
  TreeSampler(int n, int d, IntDist<mpz_class> boundary, bool regular = false)
      : n_(n), d_(d), regular_(regular) {
    if (n < 1 || d < 1) throw std::invalid_argument("TreeSampler: need n, d >= 1");
    // Exact level weights gain a factor-of-d digit count per level (each
    // weight is a d-th power of a sum), so the root weight has on the order
    // of d^n digits.  Refuse instances past ~1e8 digits up front; they would
    // grind forever in GMP otherwise.
    if (n * std::log10(static_cast<double>(d)) > 8.0)
      throw std::invalid_argument(
          "TreeSampler: exact level weights exceed the construction budget "
          "(root weight would have ~d^n digits)");
    boundary.trim();
    if (boundary.v.empty()) throw std::invalid_argument("TreeSampler: empty boundary");
    for (const auto& w : boundary.v)
      if (w < 0) throw std::invalid_argument("TreeSampler: negative boundary weight");
    levels_.resize(n + 1);
    levels_[n] = std::move(boundary);
    for (int k = n - 1; k >= 0; --k) {
      const auto& below = levels_[k + 1];
      IntDist<mpz_class> g;
      g.lo = below.lo - 1;
      g.v.assign(below.v.size() + 2, mpz_class(0));
      int arity = (k == 0 && regular_) ? d_ + 1 : d_;
      for (long hgt = g.lo; hgt <= g.hi(); ++hgt) {
        mpz_class s = below.at(hgt - 1) + below.at(hgt) + below.at(hgt + 1);
        mpz_pow_ui(g.v[hgt - g.lo].get_mpz_t(), s.get_mpz_t(),
                   static_cast<unsigned long>(arity));
      }
      g.trim();
      reduce_by_gcd(g);
      levels_[k] = std::move(g);
    }
  }

  int depth() const { return n_; }
  int arity() const { return d_; }
  const IntDist<mpz_class>& level_weights(int k) const { return levels_.at(k); }

  IntDist<mpq_class> root_law() const {
    IntDist<mpq_class> m;
    m.lo = levels_[0].lo;
    for (const auto& w : levels_[0].v) m.v.emplace_back(w);
    m.normalize();
    return m;
  }

  long draw_root(Rng& rng) const { return draw_from_level(0, rng); }

  // Draw one child height of a vertex at level k (0-based) with height h.
  long draw_child(int k, long h, Rng& rng) const {
    if (k < 0 || k >= n_) throw std::invalid_argument("draw_child: bad level");
    const auto& g = levels_[k + 1];
    mpz_class w0 = g.at(h - 1), w1 = g.at(h), w2 = g.at(h + 1);
    mpz_class total = w0 + w1 + w2;
    if (total == 0) throw std::logic_error("draw_child: zero conditional mass");
    mpz_class u = rng.below_mpz(total);
    if (u < w0) return h - 1;
    if (u < w0 + w1) return h;
    return h + 1;
  }

  // Materialize a full sample (all vertices).  Budget-guarded.
  TreeLipschitzSample sample_full(Rng& rng, double budget = 1e6) const {
    double vertices = 1, level = 1;
    for (int k = 1; k <= n_; ++k) {
      level *= (k == 1 && regular_) ? d_ + 1 : d_;
      vertices += level;
    }
    if (vertices > budget)
      throw std::invalid_argument("sample_full: tree exceeds materialization budget");
    TreeLipschitzSample s;
    s.n = n_;
    s.d = d_;
    s.full = true;
    s.height_by_vertex[{0, 0}] = draw_root(rng);
    std::uint64_t prev_count = 1;
    for (int k = 0; k < n_; ++k) {
      int arity = (k == 0 && regular_) ? d_ + 1 : d_;
      for (std::uint64_t i = 0; i < prev_count; ++i) {
        long h = s.height_by_vertex.at({k, i});
        for (int c = 0; c < arity; ++c)
          s.height_by_vertex[{k + 1, i * arity + c}] = draw_child(k, h, rng);
      }
      prev_count *= arity;
    }
    return s;
  }

 private:
  static void reduce_by_gcd(IntDist<mpz_class>& g) {
    mpz_class acc = 0;
    for (const auto& w : g.v) mpz_gcd(acc.get_mpz_t(), acc.get_mpz_t(), w.get_mpz_t());
    if (acc > 1)
      for (auto& w : g.v) mpz_divexact(w.get_mpz_t(), w.get_mpz_t(), acc.get_mpz_t());
  }

  long draw_from_level(int k, Rng& rng) const {
    const auto& g = levels_[k];
    mpz_class total = 0;
    for (const auto& w : g.v) total += w;
    mpz_class u = rng.below_mpz(total);
    mpz_class acc = 0;
    for (long hgt = g.lo; hgt <= g.hi(); ++hgt) {
      acc += g.at(hgt);
      if (u < acc) return hgt;
    }
    throw std::logic_error("draw_from_level: cumulative walk fell through");
  }

  int n_, d_;
  bool regular_;
  std::vector<IntDist<mpz_class>> levels_;  // levels_[k] = weights at depth k
};

// Convenience: `count` independent full samples with per-sample RNG streams.
inline std::vector<TreeLipschitzSample> sample_tree(int n, int d,
                                                    const IntDist<mpz_class>& boundary,
                                                    std::size_t count,
                                                    std::uint64_t seed,
                                                    bool regular = false) {
  TreeSampler sampler(n, d, boundary, regular);
  std::vector<TreeLipschitzSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::stream(seed, i);
    out.push_back(sampler.sample_full(rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lipschitz validation of a sample (every parent-child pair differs by <= 1;
// leaves carry positive boundary weight).
// ---------------------------------------------------------------------------
inline bool validate_sample(const TreeLipschitzSample& s,
                            const IntDist<mpz_class>& boundary) {
  // Rebuild parent relations level by level (arity may differ at the root in
  // the regular flavor, so derive it from the level sizes).
  int max_level = 0;
  for (const auto& [v, h] : s.height_by_vertex) max_level = std::max(max_level, v.level);
  std::vector<std::uint64_t> level_count(max_level + 1, 0);
  for (const auto& [v, h] : s.height_by_vertex)
    level_count[v.level] = std::max(level_count[v.level], v.index + 1);
  for (const auto& [v, h] : s.height_by_vertex) {
    if (v.level == 0) continue;
    std::uint64_t arity = level_count[v.level] / level_count[v.level - 1];
    long ph = s.height_by_vertex.at({v.level - 1, v.index / arity});
    if (std::labs(h - ph) > 1) return false;
    if (v.level == max_level && !(boundary.at(h) > 0)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Limiting tree-indexed Markov chain built from a (near-)fixed root marginal.
// P_{ij} = pi(j) / (pi(i-1) + pi(i) + pi(i+1)) for |j - i| <= 1.  Row sums
// are exactly 1 by construction; the stationary law is F_{d+1}(pi), and
// detailed balance holds exactly when pi is an exact fixed point of F_d
// (numerically: tiny residuals at a converged iterate).
// ---------------------------------------------------------------------------
struct LimitChain {
  IntDist<mpq_class> pi;
  IntDist<mpq_class> stationary;  // F_{d+1}(pi)
  long lo = 0;                    // state window [lo, hi]
  std::vector<std::array<mpq_class, 3>> rows;  // P_{i, i-1|i|i+1}, i = lo..hi
  bool row_sums_one = false;
  mpq_class stationarity_residual;   // sup_i |sum_j mu(j) P_{ji} - mu(i)|
  mpq_class reversibility_residual;  // sup_{i,j} |mu(i) P_{ij} - mu(j) P_{ji}|

  long hi() const { return lo + static_cast<long>(rows.size()) - 1; }
  mpq_class P(long i, long j) const {
    if (i < lo || i > hi() || j < i - 1 || j > i + 1) return mpq_class(0);
    return rows[i - lo][j - (i - 1)];
  }
};

inline LimitChain limit_chain(const IntDist<mpq_class>& pi_in, int d) {
  LimitChain ch;
  ch.pi = pi_in;
  ch.pi.trim();
  if (ch.pi.v.empty()) throw std::invalid_argument("limit_chain: empty marginal");
  for (const auto& m : ch.pi.v)
    if (!(m > 0))
      throw std::invalid_argument("limit_chain: marginal support must be an interval");
  ch.lo = ch.pi.lo;
  const long hi = ch.pi.hi();
  ch.row_sums_one = true;
  for (long i = ch.lo; i <= hi; ++i) {
    mpq_class T = ch.pi.at(i - 1) + ch.pi.at(i) + ch.pi.at(i + 1);
    std::array<mpq_class, 3> row{ch.pi.at(i - 1) / T, ch.pi.at(i) / T,
                                 ch.pi.at(i + 1) / T};
    if (!(row[0] + row[1] + row[2] == 1)) ch.row_sums_one = false;
    ch.rows.push_back(std::move(row));
  }
  ch.stationary = apply_F(ch.pi, d + 1);
  // residuals
  ch.stationarity_residual = 0;
  for (long i = ch.lo; i <= hi; ++i) {
    mpq_class s = 0;
    for (long j = i - 1; j <= i + 1; ++j)
      if (j >= ch.lo && j <= hi) s += ch.stationary.at(j) * ch.P(j, i);
    mpq_class r = abs_val(mpq_class(s - ch.stationary.at(i)));
    if (r > ch.stationarity_residual) ch.stationarity_residual = r;
  }
  ch.reversibility_residual = 0;
  for (long i = ch.lo; i <= hi; ++i)
    for (long j = i; j <= i + 1; ++j) {
      if (j > hi) continue;
      mpq_class r = abs_val(
          mpq_class(ch.stationary.at(i) * ch.P(i, j) - ch.stationary.at(j) * ch.P(j, i)));
      if (r > ch.reversibility_residual) ch.reversibility_residual = r;
    }
  return ch;
}

// Lossless conversion of a float marginal for exact chain checks.
inline IntDist<mpq_class> exactify(const ProbDist<double>& z) {
  IntDist<mpq_class> out;
  long k = z.support_radius();
  out.lo = -k;
  for (long i = -k; i <= k; ++i) out.v.push_back(rational_from_double(z.at(i)));
  return out;
}

inline CertificateReport limit_chain_certificate(const IntDist<mpq_class>& pi, int d,
                                                 double stat_tol = 1e-10,
                                                 double rev_tol = 1e-12) {
  CertificateReport rep{"limit chain checks, d = " + std::to_string(d)};
  LimitChain ch = limit_chain(pi, d);
  rep.add("transition rows sum to 1 exactly", ch.row_sums_one,
          std::to_string(ch.rows.size()) + " states");
  double sr = to_double(ch.stationarity_residual);
  rep.add("stationarity residual of F_{d+1}(pi) below tolerance", sr < stat_tol,
          "residual = " + fmt6(sr) + ", tolerance " + fmt6(stat_tol));
  double rr = to_double(ch.reversibility_residual);
  rep.add("detailed-balance residual below tolerance", rr < rev_tol,
          "residual = " + fmt6(rr) + ", tolerance " + fmt6(rev_tol));
  return rep;
}

// ---------------------------------------------------------------------------
// Stochastic domination between boundary conditions: low is dominated by
// high iff CDF_low(t) >= CDF_high(t) for every t.  Compared exactly on the
// unnormalized integer weights by cross-multiplication.
// ---------------------------------------------------------------------------
inline CertificateReport domination_check(int n, int d,
                                          const IntDist<mpz_class>& w_low,
                                          const IntDist<mpz_class>& w_high,
                                          const std::string& label = "") {
  CertificateReport rep{"stochastic domination " + label + " (n = " +
                        std::to_string(n) + ", d = " + std::to_string(d) + ")"};
  TreeSampler low(n, d, w_low), high(n, d, w_high);
  const auto& gl = low.level_weights(0);
  const auto& gh = high.level_weights(0);
  mpz_class tot_l = 0, tot_h = 0;
  for (const auto& w : gl.v) tot_l += w;
  for (const auto& w : gh.v) tot_h += w;
  long lo = std::min(gl.lo, gh.lo), hi = std::max(gl.hi(), gh.hi());
  bool ok = true;
  long first_bad = 0;
  mpz_class cl = 0, chg = 0;
  for (long t = lo; t <= hi && ok; ++t) {
    cl += gl.at(t);
    chg += gh.at(t);
    if (cl * tot_h < chg * tot_l) {
      ok = false;
      first_bad = t;
    }
  }
  std::string det = "CDF comparison over [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]";
  if (!ok) det += ", first crossing at t = " + std::to_string(first_bad);
  rep.add("CDF(low) >= CDF(high) everywhere", ok, det);
  return rep;
}

// ---------------------------------------------------------------------------
// Chi-square goodness of fit with small-expectation cells merged (expected
// count >= 5 per merged cell), p-value from the chi-squared distribution.
// ---------------------------------------------------------------------------
struct ChiSquareResult {
  double statistic = 0;
  int dof = 0;
  double p_value = 0;
  std::size_t cells = 0;
};

inline ChiSquareResult chi_square_gof(const std::vector<double>& observed,
                                      const std::vector<double>& expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: mismatched inputs");
  std::vector<double> obs_m, exp_m;
  double o = 0, e = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += observed[i];
    e += expected[i];
    if (e >= 5.0) {
      obs_m.push_back(o);
      exp_m.push_back(e);
      o = e = 0;
    }
  }
  if (e > 0 || o > 0) {
    if (!exp_m.empty()) {
      obs_m.back() += o;
      exp_m.back() += e;
    } else {
      obs_m.push_back(o);
      exp_m.push_back(e);
    }
  }
  ChiSquareResult r;
  r.cells = exp_m.size();
  for (std::size_t i = 0; i < exp_m.size(); ++i) {
    double diff = obs_m[i] - exp_m[i];
    r.statistic += diff * diff / exp_m[i];
  }
  r.dof = static_cast<int>(exp_m.size()) - 1;
  if (r.dof < 1) {
    r.p_value = 1.0;
    return r;
  }
  boost::math::chi_squared dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

// ---------------------------------------------------------------------------
// Even/odd dichotomy diagnostics: total-variation gaps between marginals at
// consecutive and next-to-consecutive depths.
// ---------------------------------------------------------------------------
struct TvGapRow {
  int n = 0;
  double tv_next = 0;       // TV(mu_n, mu_{n+1})
  double tv_next_next = 0;  // TV(mu_n, mu_{n+2})
};

inline std::vector<TvGapRow> tv_gap_chain(int d, int n_max,
                                          const ProbDist<double>& w =
                                              ProbDist<double>::delta0()) {
  std::vector<ProbDist<double>> mu;
  mu.reserve(n_max + 3);
  mu.push_back(w);
  for (int k = 1; k <= n_max + 2; ++k) mu.push_back(apply_F(mu.back(), d));
  std::vector<TvGapRow> rows;
  rows.reserve(n_max);
  for (int n = 1; n <= n_max; ++n)
    rows.push_back({n, to_double(tv_distance(mu[n], mu[n + 1])),
                    to_double(tv_distance(mu[n], mu[n + 2]))});
  return rows;
}

}  // namespace liptree
