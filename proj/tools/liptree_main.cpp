// Command-line front end.  Every library operation is a subcommand with
// reproducible seeding, float/rational arithmetic selection, and CSV/JSON
// emission.  Exit codes: 0 success, 2 certificate failure, 3 invalid input.
#include <CLI11.hpp>

#include <liptree/constants.hpp>
#include <liptree/contraction.hpp>
#include <liptree/envelope.hpp>
#include <liptree/gibbsmc.hpp>
#include <liptree/json_io.hpp>
#include <liptree/recursion.hpp>
#include <liptree/rng.hpp>
#include <liptree/scalar.hpp>
#include <liptree/seqspace.hpp>
#include <liptree/treesampler.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace liptree;
using Q = mpq_class;

constexpr int kOk = 0;
constexpr int kCertFail = 2;
constexpr int kBadInput = 3;

struct GlobalFlags {
  std::uint64_t seed = 20260819ull;
  std::string mode = "float";
  int threads = 1;  // accepted for interface stability; modules are single-threaded
  std::string out;
  std::string format;  // empty = subcommand default
};

// --- I/O helpers -------------------------------------------------------------

ordered_json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open file: " + path);
  ordered_json j;
  is >> j;
  return j;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    write_text_file(out, text);
  }
}

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON scalar (number or string) -> arithmetic type of the active mode.
template <class S>
S parse_scalar_json(const ordered_json& j) {
  if constexpr (is_rational_v<S>) {
    if (j.is_string()) return rational_from_string(j.get<std::string>());
    if (j.is_number_integer()) return from_long<S>(j.get<long>());
    if (j.is_number_float()) return rational_from_double(j.get<double>());
  } else {
    if (j.is_string()) return to_double(rational_from_string(j.get<std::string>()));
    if (j.is_number()) return j.get<double>();
  }
  throw std::invalid_argument("expected a number or a rational string");
}

// Boundary weights: "zero", "interval:k" (unit weights on [-k, k]), or a JSON
// file {"lo": <int>, "values": [w, ...]} with integer or integer-string weights.
IntDist<mpz_class> parse_boundary(const std::string& spec) {
  IntDist<mpz_class> w;
  if (spec == "zero") {
    w.lo = 0;
    w.v = {mpz_class(1)};
    return w;
  }
  if (spec.rfind("interval:", 0) == 0) {
    long k = std::stol(spec.substr(9));
    if (k < 0) throw std::invalid_argument("interval:k needs k >= 0");
    w.lo = -k;
    w.v.assign(static_cast<std::size_t>(2 * k + 1), mpz_class(1));
    return w;
  }
  ordered_json j = read_json_file(spec);
  w.lo = j.at("lo").get<long>();
  for (const auto& x : j.at("values")) {
    if (x.is_string())
      w.v.emplace_back(x.get<std::string>());
    else
      w.v.emplace_back(static_cast<unsigned long>(x.get<std::uint64_t>()));
  }
  return w;
}

// Graph spec: "tree:d,n", "grid:w,h", "path:k", "star:k", or a JSON file.
GraphSpec parse_graph(const std::string& spec) {
  auto two_ints = [&](const std::string& body) {
    auto comma = body.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument("graph spec needs two comma-separated integers: " + spec);
    return std::pair<int, int>{std::stoi(body.substr(0, comma)),
                               std::stoi(body.substr(comma + 1))};
  };
  if (spec.rfind("tree:", 0) == 0) {
    auto [d, n] = two_ints(spec.substr(5));
    return tree_graph(d, n);
  }
  if (spec.rfind("grid:", 0) == 0) {
    auto [w, h] = two_ints(spec.substr(5));
    return grid_graph(w, h);
  }
  if (spec.rfind("path:", 0) == 0) return path_graph(std::stoi(spec.substr(5)));
  if (spec.rfind("star:", 0) == 0) return star_graph(std::stoi(spec.substr(5)));
  return graph_from_json(read_json_file(spec));
}

KappaSpec kappa_from_json(const ordered_json& j) {
  KappaSpec k;
  for (const auto& [key, val] : j.items()) {
    auto set = val.get<std::vector<long>>();
    std::sort(set.begin(), set.end());
    k[std::stoi(key)] = std::move(set);
  }
  return k;
}

// ceil(x * 10^digits) / 10^digits, and its decimal rendering ("0.38").
Q ceil_q(const Q& x, int digits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned>(digits));
  Q scaled = x * Q(scale);
  mpz_class up;
  mpz_cdiv_q(up.get_mpz_t(), scaled.get_num().get_mpz_t(),
             scaled.get_den().get_mpz_t());
  Q r(up, scale);
  r.canonicalize();
  return r;
}

std::string decimal_string(const Q& x, int digits) {
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned>(digits));
  Q scaled = x * Q(scale);
  if (scaled.get_den() != 1)
    throw std::logic_error("decimal_string: value is not a " + std::to_string(digits) +
                           "-digit decimal");
  mpz_class n = scaled.get_num();
  bool neg = n < 0;
  if (neg) n = -n;
  std::string body = n.get_str();
  if (static_cast<int>(body.size()) <= digits)
    body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
  body.insert(body.size() - static_cast<std::size_t>(digits), ".");
  return (neg ? "-" : "") + body;
}

// --- iterate -------------------------------------------------------------------

template <class S>
RatioSeq<S> starting_point(const std::string& start) {
  if (start == "zero") return RatioSeq<S>::zero();
  ordered_json j = read_json_file(start);
  WeightSeq<S> w;
  w.flat_radius = j.at("flat_radius").get<long>();
  w.decay_rate = parse_scalar_json<S>(j.at("decay_rate"));
  if (j.contains("flat_value")) w.flat_value = parse_scalar_json<S>(j.at("flat_value"));
  if (j.contains("tail"))
    for (const auto& t : j.at("tail")) w.tail.push_back(parse_scalar_json<S>(t));
  auto good = is_good_weight(w);
  if (!good.ok) throw std::invalid_argument("weights file rejected: " + good.why);
  return ratio_transform(good.normalized);
}

template <class S>
int run_iterate(int d, const std::string& start, long steps, long every_flag,
                double tol, bool stop, const GlobalFlags& gf) {
  RatioSeq<S> x0 = starting_point<S>(start);
  IterateOptions opt;
  opt.tol = tol;
  opt.stop_on_convergence = stop;
  const std::string fmt = gf.format.empty() ? "csv" : gf.format;

  if (fmt == "csv") {
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!gf.out.empty()) {
      file.open(gf.out);
      if (!file) throw std::runtime_error("cannot open for writing: " + gf.out);
      os = &file;
    }
    trace_csv_header<S>(*os);
    const std::size_t every = every_flag > 0
                                  ? static_cast<std::size_t>(every_flag)
                                  : std::max<std::size_t>(1, static_cast<std::size_t>(steps) / 1000);
    opt.record_every = static_cast<std::size_t>(steps);  // stream rows instead
    std::size_t last_written = 0;
    auto write_row = [&](std::size_t k, const RatioSeq<S>& x, double delta) {
      TraceRow<S> row;
      row.step = k;
      for (std::size_t i = 0; i < 8; ++i) row.x[i] = to_double(x.at(i + 1));
      row.delta = delta;
      trace_row_csv(*os, row);
      last_written = k;
    };
    auto tr = iterate_psi(x0, d, static_cast<std::size_t>(steps), opt,
                          StepCallback<S>([&](std::size_t k, const RatioSeq<S>& x,
                                              double delta) {
                            if (k == 1 || k % every == 0 ||
                                k == static_cast<std::size_t>(steps))
                              write_row(k, x, delta);
                          }));
    if (tr.steps != last_written)  // early convergence stop between strides
      write_row(tr.steps, tr.final_state, tr.norm_deltas.back());
    if (!tr.truncation_events.empty())
      std::fprintf(stderr, "note: %zu truncation event(s), first at step %zu\n",
                   tr.truncation_events.size(), tr.truncation_events.front());
    return kOk;
  }

  opt.record_every = every_flag > 0 ? static_cast<std::size_t>(every_flag) : 0;
  auto tr = iterate_psi(x0, d, static_cast<std::size_t>(steps), opt);
  ordered_json j = trace_to_json(tr);
  j["d"] = d;
  j["mode"] = gf.mode;
  emit(gf.out, j.dump(2) + "\n");
  return kOk;
}

// --- envelope --------------------------------------------------------------------

int run_envelope(int d, const std::string& rounds, const GlobalFlags& gf) {
  PipelineRounds r = PipelineRounds::auto_rounds;
  if (rounds == "1") r = PipelineRounds::one;
  if (rounds == "2") r = PipelineRounds::two;
  auto res = two_round_pipeline(d, r);
  auto dom = verify_triple_domination(d, res.final_box);
  ordered_json j = res.to_json();
  j["domination"] = dom.to_json();
  emit(gf.out, j.dump(2) + "\n");
  return dom.pass() ? kOk : kCertFail;
}

// --- certify ---------------------------------------------------------------------

CertificateReport custom_triple_report(int d, const std::string& abc) {
  std::vector<Q> vals;
  std::stringstream ss(abc);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(rational_from_string(tok));
  if (vals.size() != 3)
    throw std::invalid_argument("--abc needs three comma-separated rationals");
  EnvelopeTriple<Q> t{vals[0], vals[1], vals[2]};
  CertificateReport rep{"contraction bounds at custom triple, d = " + std::to_string(d)};
  rep.add("triple lies in the simplex {0 <= a, c <= b <= 1}", t.in_simplex(),
          "(a, b, c) = (" + to_string_full(t.a) + ", " + to_string_full(t.b) + ", " +
              to_string_full(t.c) + ")");
  if (!t.in_simplex()) return rep;
  side_condition_checks(rep, t, d);
  if (side_conditions_hold(t, d)) {
    Q opn = opnorm_bound(derivative_bounds(t, d), d);
    rep.add("operator norm bound < 99/100", opn < Q(99, 100),
            "opnorm <= " + to_string_full(opn) + " ~= " + fmt6(to_double(opn)));
  } else {
    rep.note("derivative bounds skipped: side conditions fail at this triple");
  }
  return rep;
}

PartitionSpec partition_from_json(const ordered_json& j) {
  PartitionSpec spec;
  spec.d = j.at("d").get<int>();
  spec.c_d = parse_scalar_json<Q>(j.at("c_d"));
  for (const auto& cell : j.at("cells"))
    spec.cells.emplace_back(parse_scalar_json<Q>(cell.at(0)),
                            parse_scalar_json<Q>(cell.at(1)));
  return spec;
}

int run_certify(int d, const std::string& what, const std::string& abc,
                const std::string& partition_file, long horizon, const GlobalFlags& gf) {
  std::vector<CertificateReport> reps;
  const bool all = what == "all";
  if (what == "contraction" || (all && d <= 7)) {
    if (!abc.empty())
      reps.push_back(custom_triple_report(d, abc));
    else
      reps.push_back(contraction_certificate(d, gf.seed));
  }
  if (what == "partition" || (all && d <= 7)) {
    PartitionSpec spec = partition_file.empty()
                             ? PartitionSpec::builtin(d)
                             : partition_from_json(read_json_file(partition_file));
    reps.push_back(partition_certificate(spec));
  }
  if (what == "nonconvergence" || (all && d >= 8))
    reps.push_back(nonconvergence_certificate(d, static_cast<std::size_t>(horizon)));
  if (reps.empty())
    throw std::invalid_argument("certify: nothing to run for d = " + std::to_string(d) +
                                " with --what " + what);
  bool pass = true;
  ordered_json arr = ordered_json::array();
  for (const auto& r : reps) {
    pass = pass && r.pass();
    arr.push_back(r.to_json());
  }
  ordered_json j;
  j["d"] = d;
  j["pass"] = pass;
  j["reports"] = arr;
  emit(gf.out, j.dump(2) + "\n");
  return pass ? kOk : kCertFail;
}

// --- sample / marginal --------------------------------------------------------------

int run_sample(int n, int d, const std::string& boundary, long count, bool regular,
               const GlobalFlags& gf) {
  TreeSampler sampler(n, d, parse_boundary(boundary), regular);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!gf.out.empty()) {
    file.open(gf.out);
    if (!file) throw std::runtime_error("cannot open for writing: " + gf.out);
    os = &file;
  }
  for (long i = 0; i < count; ++i) {
    Rng rng = Rng::stream(gf.seed, static_cast<std::uint64_t>(i));
    *os << sample_to_json(sampler.sample_full(rng)).dump() << "\n";
  }
  return kOk;
}

template <class S>
int run_marginal(int n, int d, const std::string& boundary, bool regular,
                 const GlobalFlags& gf) {
  IntDist<mpz_class> wz = parse_boundary(boundary);
  IntDist<S> w;
  w.lo = wz.lo;
  for (const auto& m : wz.v) {
    if constexpr (is_rational_v<S>)
      w.v.emplace_back(m);
    else
      w.v.push_back(m.get_d());
  }
  w.normalize();
  auto marg = root_marginal_general(n, d, w, regular);
  ordered_json j;
  j["n"] = n;
  j["d"] = d;
  j["regular"] = regular;
  j["mode"] = gf.mode;
  j["marginal"] = intdist_to_json(marg);
  emit(gf.out, j.dump(2) + "\n");
  return kOk;
}

// --- gibbs -----------------------------------------------------------------------

int run_gibbs(const std::string& graph, int M, long a, long b, long sweeps,
              long chains, double tol, std::vector<int> probes, const GlobalFlags& gf) {
  GraphSpec g = parse_graph(graph);
  const KappaSpec* override_kappa = g.kappa.empty() ? nullptr : &g.kappa;
  auto state = glauber_run(g, M, {a, b}, static_cast<std::size_t>(sweeps), gf.seed,
                           override_kappa);
  if (probes.empty())
    for (int v = 0; v < g.size(); ++v) probes.push_back(v);
  auto stats = cluster_stats(state, g, {a, b}, probes);

  ordered_json j;
  j["graph"] = graph_to_json(g);
  j["M"] = M;
  j["a"] = a;
  j["b"] = b;
  j["sweeps"] = sweeps;
  j["seed"] = gf.seed;
  j["final_state"] = state.values;
  j["clusters"] = cluster_stats_to_json(stats);

  int rc = kOk;
  if (chains > 0) {
    auto rep = glauber_stationarity_report(g, M, {a, b}, static_cast<std::size_t>(sweeps),
                                           static_cast<std::size_t>(chains), gf.seed, tol);
    j["stationarity"] = rep.to_json();
    if (!rep.pass()) rc = kCertFail;
  }
  emit(gf.out, j.dump(2) + "\n");
  return rc;
}

// --- fkg -------------------------------------------------------------------------

int run_fkg(const std::string& graph, const std::string& mode,
            const std::string& kappa_file, int M, const GlobalFlags& gf) {
  CertificateReport rep{""};
  if (mode == "counterexample") {
    rep = fkg_counterexample();
  } else {
    if (kappa_file.empty())
      throw std::invalid_argument("fkg: --kappa <file> is required unless --mode counterexample");
    GraphSpec g = parse_graph(graph);
    ordered_json j = read_json_file(kappa_file);
    std::vector<std::pair<KappaSpec, KappaSpec>> pairs;
    for (const auto& p : j.at("pairs"))
      pairs.emplace_back(kappa_from_json(p.at(0)), kappa_from_json(p.at(1)));
    if (pairs.empty()) throw std::invalid_argument("fkg: no kappa pairs in " + kappa_file);
    rep = fkg_bruteforce(g, pairs,
                         mode == "heights" ? FkgMode::heights : FkgMode::shifted_abs, M);
  }
  emit(gf.out, rep.to_json().dump(2) + "\n");
  return rep.pass() ? kOk : kCertFail;
}

// --- tables ------------------------------------------------------------------------

std::string make_table(int which) {
  std::ostringstream os;
  auto header = [&](int dmax) {
    os << "quantity";
    for (int d = 2; d <= dmax; ++d) os << ",d=" << d;
    os << "\n";
  };
  switch (which) {
    case 1: {  // fixed point of phi, ten thousand float iterations from (0, 1, .9)
      header(8);
      std::vector<EnvelopeTriple<double>> fp;
      for (int d = 2; d <= 8; ++d)
        fp.push_back(iterate_phi(EnvelopeTriple<double>{0.0, 1.0, 0.9}, d, 10000));
      const char* names[3] = {"a_star", "b_star", "c_star"};
      for (int r = 0; r < 3; ++r) {
        os << names[r];
        for (const auto& t : fp)
          os << "," << num17(r == 0 ? t.a : r == 1 ? t.b : t.c);
        os << "\n";
      }
      break;
    }
    case 2: {  // certified invariant triples
      header(7);
      const char* names[3] = {"a_hat", "b_hat", "c_hat"};
      for (int r = 0; r < 3; ++r) {
        os << names[r];
        for (int d = 2; d <= 7; ++d) {
          auto t = tables::certified_triple(d);
          os << "," << to_string_full(r == 0 ? t.a : r == 1 ? t.b : t.c);
        }
        os << "\n";
      }
      break;
    }
    case 3: {  // psi fixed point and partials, one million float iterations
      header(7);
      std::vector<std::array<double, 8>> cols;
      for (int d = 2; d <= 7; ++d) {
        IterateOptions opt;
        auto tr = iterate_psi(RatioSeq<double>::zero(), d, 1000000, opt);
        const auto& x = tr.final_state;
        auto [p10, p11, p12] = psi_partials(x, 1, d);
        auto [p21, p22, p23] = psi_partials(x, 2, d);
        (void)p10;
        (void)p23;
        cols.push_back({to_double(x.at(1)), to_double(x.at(2)), to_double(x.at(3)),
                        to_double(x.at(4)), -p11, p12, p21, p22});
      }
      const char* names[8] = {"x1",           "x2",          "x3",          "x4",
                              "-dpsi1_dx1",   "dpsi1_dx2",   "dpsi2_dx1",   "dpsi2_dx2"};
      for (int r = 0; r < 8; ++r) {
        os << names[r];
        for (const auto& c : cols) os << "," << num17(c[static_cast<std::size_t>(r)]);
        os << "\n";
      }
      break;
    }
    case 4: {  // derivative bounds rounded up, and the composed operator norm
      header(7);
      std::vector<std::array<Q, 6>> cols;
      for (int d = 2; d <= 7; ++d) {
        auto db = derivative_bounds(tables::certified_triple(d), d);
        auto pr = tables::printed_derivative_bounds(d);
        std::array<Q, 6> col;
        col[0] = ceil_q(db.dpsi1_dx1, pr.digits_t11);
        col[1] = ceil_q(db.dpsi1_dx2, pr.digits_t12);
        col[2] = ceil_q(db.dpsin_dxnm1, pr.digits_prev);
        col[3] = ceil_q(db.dpsin_dxn, pr.digits_self);
        col[4] = ceil_q(db.dpsin_dxnp1, pr.digits_next);
        // Composition of the rounded bounds (no tail refinement), matching the
        // convention of the reference row.
        col[5] = d == 2 ? std::max(Q(col[0] + col[1]), Q(col[2] + col[3] + col[4]))
                        : std::max(Q(col[0] + col[2]), Q(col[1] + col[3] + col[4]));
        cols.push_back(col);
      }
      const char* names[6] = {"dpsi1_dx1", "dpsi1_dx2", "dpsin_dxnm1",
                              "dpsin_dxn", "dpsin_dxnp1", "opnorm"};
      std::array<int, 6> digits;
      for (int r = 0; r < 6; ++r) {
        os << names[r];
        for (int d = 2; d <= 7; ++d) {
          auto pr = tables::printed_derivative_bounds(d);
          digits = {pr.digits_t11, pr.digits_t12, pr.digits_prev,
                    pr.digits_self, pr.digits_next,
                    std::max(pr.digits_t11, pr.digits_self)};
          os << "," << decimal_string(cols[static_cast<std::size_t>(d - 2)]
                                          [static_cast<std::size_t>(r)],
                                      digits[static_cast<std::size_t>(r)]);
        }
        os << "\n";
      }
      break;
    }
    case 5: case 6: case 7: case 8: {
      std::vector<PipelineResult> res;
      for (int d = 2; d <= 7; ++d) res.push_back(two_round_pipeline(d));
      if (which == 5) {  // first certified round: a (lower), b, c (upper)
        header(7);
        const char* names[3] = {"a_round1_lo", "b_round1_hi", "c_round1_hi"};
        for (int r = 0; r < 3; ++r) {
          os << names[r];
          for (const auto& p : res)
            os << "," << to_string_full(r == 0 ? p.a1.lo : r == 1 ? p.b1.hi : p.c1.hi);
          os << "\n";
        }
      } else if (which == 6) {  // second round, run for d = 2 and 7 only
        os << "quantity,d=2,d=7\n";
        const char* names[4] = {"b_prime", "a_round2_lo", "b_round2_hi", "c_round2_hi"};
        for (int r = 0; r < 4; ++r) {
          os << names[r];
          for (const auto& p : res) {
            if (!p.round2_run) continue;
            Q v = r == 0 ? p.b_prime
                         : r == 1 ? p.a2->lo
                                  : r == 2 ? p.b2->hi : p.c2->hi;
            os << "," << to_string_full(v);
          }
          os << "\n";
        }
      } else {
        header(7);
        const bool odd = which == 7;  // 7: one extra odd step; 8: final boxes
        const char* names[3] = {"a", "b", "c"};
        for (int r = 0; r < 3; ++r) {
          os << names[r] << (odd ? "_odd" : "_final");
          for (const auto& p : res) {
            const auto& t = odd ? p.odd_step : p.final_box;
            os << "," << to_string_full(r == 0 ? t.a : r == 1 ? t.b : t.c);
          }
          os << "\n";
        }
      }
      break;
    }
    default:
      throw std::invalid_argument("tables: --which must be in 1..8");
  }
  return os.str();
}

int run_tables(std::vector<int> which, const GlobalFlags& gf) {
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};
  if (gf.out.empty()) {
    std::string all;
    for (int w : which) all += "# table " + std::to_string(w) + "\n" + make_table(w);
    emit("", all);
  } else {
    for (int w : which)
      write_text_file(gf.out + "table" + std::to_string(w) + ".csv", make_table(w));
  }
  return kOk;
}

// --- figure1 -------------------------------------------------------------------------

int run_figure1(std::vector<int> ds, int grid, const GlobalFlags& gf) {
  if (ds.empty()) ds = {2, 7, 8, 12};
  std::ostringstream os;
  os << "d,x,f,ff\n";
  for (int d : ds) {
    for (const auto& row : figure1_grid(d, static_cast<std::size_t>(grid)))
      os << d << "," << num17(row.x) << "," << num17(row.fx) << "," << num17(row.ffx)
         << "\n";
    std::fprintf(stderr, "d = %d: f o f - id has %d sign change(s) on (0, 1)\n", d,
                 sign_changes_ff_minus_x(d));
  }
  emit(gf.out, os.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "liptree: recursions, certificates and samplers for uniform Lipschitz "
      "functions on d-ary trees"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags gf;
  app.add_option("--seed", gf.seed, "RNG seed (default 20260819)");
  app.add_option("--mode", gf.mode, "arithmetic: float or rational")
      ->check(CLI::IsMember({"float", "rational"}));
  app.add_option("--threads", gf.threads,
                 "reserved; all modules are single-threaded")
      ->check(CLI::Range(1, 1024));
  app.add_option("--out", gf.out, "output path (default: stdout)");
  app.add_option("--format", gf.format, "output format where applicable")
      ->check(CLI::IsMember({"json", "csv"}));

  // iterate
  auto* it = app.add_subcommand("iterate", "Iterate the ratio map psi and emit the trace");
  int it_d = 2;
  std::string it_start = "zero";
  long it_steps = 1000, it_every = 0;
  double it_tol = 1e-13;
  bool it_stop = false;
  it->add_option("--d", it_d, "branching factor")->required()->check(CLI::Range(1, 1 << 20));
  it->add_option("--start", it_start, "zero, or a good-weights JSON file");
  it->add_option("--steps", it_steps, "iteration count")->required()->check(CLI::PositiveNumber);
  it->add_option("--every", it_every, "record stride (0 = about 1000 rows)");
  it->add_option("--tol", it_tol, "convergence tolerance on the step norm");
  it->add_flag("--stop-on-convergence", it_stop, "stop after 10 consecutive steps below --tol");

  // envelope
  auto* env = app.add_subcommand("envelope", "Certified two-round envelope pipeline");
  int env_d = 2;
  std::string env_rounds = "auto";
  env->add_option("--d", env_d, "branching factor, 2..7")->required();
  env->add_option("--rounds", env_rounds, "1, 2 or auto")
      ->check(CLI::IsMember({"1", "2", "auto"}));

  // certify
  auto* cert = app.add_subcommand("certify", "Exact-rational certificates");
  int cert_d = 2;
  std::string cert_what = "all", cert_abc, cert_partition;
  long cert_horizon = 200;
  cert->add_option("--d", cert_d, "branching factor")->required();
  cert->add_option("--what", cert_what, "contraction, partition, nonconvergence or all")
      ->check(CLI::IsMember({"contraction", "partition", "nonconvergence", "all"}));
  cert->add_option("--abc", cert_abc, "override triple a,b,c (rational strings)");
  cert->add_option("--partition-file", cert_partition,
                   "partition JSON {d, c_d, cells: [[lo, hi], ...]}");
  cert->add_option("--horizon", cert_horizon, "non-convergence horizon in double steps")
      ->check(CLI::PositiveNumber);

  // sample
  auto* smp = app.add_subcommand("sample", "Exact tree samples as JSON lines");
  int smp_n = 2, smp_d = 2;
  std::string smp_boundary = "zero";
  long smp_count = 1;
  bool smp_regular = false;
  smp->add_option("--n", smp_n, "tree depth")->required()->check(CLI::PositiveNumber);
  smp->add_option("--d", smp_d, "branching factor")->required()->check(CLI::PositiveNumber);
  smp->add_option("--boundary", smp_boundary, "zero, interval:k, or a JSON weights file");
  smp->add_option("--count", smp_count, "number of samples")->check(CLI::PositiveNumber);
  smp->add_flag("--regular", smp_regular, "root has d+1 children (regular tree)");

  // marginal
  auto* marg = app.add_subcommand("marginal", "Exact root marginal by the recursion");
  int marg_n = 2, marg_d = 2;
  std::string marg_boundary = "zero";
  bool marg_regular = false;
  marg->add_option("--n", marg_n, "tree depth")->required()->check(CLI::PositiveNumber);
  marg->add_option("--d", marg_d, "branching factor")->required()->check(CLI::PositiveNumber);
  marg->add_option("--boundary", marg_boundary, "zero, interval:k, or a JSON weights file");
  marg->add_flag("--regular", marg_regular, "root has d+1 children (regular tree)");

  // gibbs
  auto* gib = app.add_subcommand("gibbs", "Glauber dynamics and cluster statistics");
  std::string gib_graph;
  int gib_M = 1;
  long gib_a = 0, gib_b = 0, gib_sweeps = 1000, gib_chains = 0;
  double gib_tol = 0.01;
  std::vector<int> gib_probes;
  gib->add_option("--graph", gib_graph, "file.json, tree:d,n, grid:w,h, path:k or star:k")
      ->required();
  gib->add_option("--M", gib_M, "Lipschitz constant")->check(CLI::PositiveNumber);
  gib->add_option("--a", gib_a, "even-sublattice target interval low end");
  gib->add_option("--b", gib_b, "even-sublattice target interval high end");
  gib->add_option("--sweeps", gib_sweeps, "systematic sweeps")->check(CLI::PositiveNumber);
  gib->add_option("--chains", gib_chains,
                  "if > 0, run the stationarity diagnostic with this many chains");
  gib->add_option("--tol", gib_tol, "per-vertex TV tolerance for the diagnostic");
  gib->add_option("--probes", gib_probes, "vertices for the cluster-size histogram")
      ->delimiter(',');

  // fkg
  auto* fkg = app.add_subcommand("fkg", "Exhaustive FKG/CBC checks");
  std::string fkg_graph = "path:3", fkg_mode = "heights", fkg_kappa;
  int fkg_M = 1;
  fkg->add_option("--graph", fkg_graph, "file.json, tree:d,n, grid:w,h, path:k or star:k");
  fkg->add_option("--mode", fkg_mode, "heights, shifted-abs or counterexample")
      ->check(CLI::IsMember({"heights", "shifted-abs", "counterexample"}));
  fkg->add_option("--kappa", fkg_kappa, "JSON file {pairs: [[kappa, kappa'], ...]}");
  fkg->add_option("--M", fkg_M, "Lipschitz constant (heights mode only)")
      ->check(CLI::PositiveNumber);

  // tables
  auto* tab = app.add_subcommand("tables", "Reference tables as CSV");
  std::vector<int> tab_which;
  tab->add_option("--which", tab_which, "tables to emit (1..8; default all)")
      ->delimiter(',');

  // figure1
  auto* fig = app.add_subcommand("figure1", "Grid data for f(1, x) and f o f");
  std::vector<int> fig_d;
  int fig_grid = 1001;
  fig->add_option("--d", fig_d, "branching factors (default 2,7,8,12)")->delimiter(',');
  fig->add_option("--grid", fig_grid, "points per curve")->check(CLI::Range(2, 100000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  const bool rational = gf.mode == "rational";
  try {
    if (it->parsed())
      return rational ? run_iterate<mpq_class>(it_d, it_start, it_steps, it_every, it_tol,
                                               it_stop, gf)
                      : run_iterate<double>(it_d, it_start, it_steps, it_every, it_tol,
                                            it_stop, gf);
    if (env->parsed()) return run_envelope(env_d, env_rounds, gf);
    if (cert->parsed())
      return run_certify(cert_d, cert_what, cert_abc, cert_partition, cert_horizon, gf);
    if (smp->parsed())
      return run_sample(smp_n, smp_d, smp_boundary, smp_count, smp_regular, gf);
    if (marg->parsed())
      return rational ? run_marginal<mpq_class>(marg_n, marg_d, marg_boundary,
                                                marg_regular, gf)
                      : run_marginal<double>(marg_n, marg_d, marg_boundary, marg_regular,
                                             gf);
    if (gib->parsed())
      return run_gibbs(gib_graph, gib_M, gib_a, gib_b, gib_sweeps, gib_chains, gib_tol,
                       gib_probes, gf);
    if (fkg->parsed()) return run_fkg(fkg_graph, fkg_mode, fkg_kappa, fkg_M, gf);
    if (tab->parsed()) return run_tables(tab_which, gf);
    if (fig->parsed()) return run_figure1(fig_d, fig_grid, gf);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kBadInput;
  }
  return kBadInput;  // unreachable with require_subcommand(1)
}
