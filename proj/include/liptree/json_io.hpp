// JSON and CSV serialization for distributions, traces, samples, graphs and
// chains, shared by the command-line tool and the tests.
#pragma once

#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "envelope.hpp"
#include "gibbsmc.hpp"
#include "recursion.hpp"
#include "seqspace.hpp"
#include "treesampler.hpp"

namespace liptree {

using ordered_json = nlohmann::ordered_json;

// --- scalars: doubles stay numbers, rationals become "p/q" strings ---------
inline ordered_json scalar_to_json(double x) { return x; }
inline ordered_json scalar_to_json(const mpq_class& x) { return to_string_full(x); }
inline ordered_json scalar_to_json(const mpz_class& x) { return x.get_str(); }

template <class S>
ordered_json probdist_to_json(const ProbDist<S>& z) {
  ordered_json j;
  j["kind"] = "symmetric";
  j["radius"] = z.support_radius();
  ordered_json vals = ordered_json::array();
  for (long i = 0; i <= z.support_radius(); ++i) vals.push_back(scalar_to_json(z.at(i)));
  j["values_from_center"] = vals;
  return j;
}

template <class S>
ordered_json intdist_to_json(const IntDist<S>& z) {
  ordered_json j;
  j["kind"] = "interval";
  j["lo"] = z.lo;
  ordered_json vals = ordered_json::array();
  for (const auto& v : z.v) vals.push_back(scalar_to_json(v));
  j["values"] = vals;
  return j;
}

template <class S>
ordered_json ratioseq_to_json(const RatioSeq<S>& x) {
  ordered_json vals = ordered_json::array();
  for (const auto& v : x.entries) vals.push_back(scalar_to_json(v));
  ordered_json j;
  j["entries"] = vals;
  j["cap"] = x.cap;
  return j;
}

template <class S>
ordered_json triple_to_json(const EnvelopeTriple<S>& t) {
  ordered_json j;
  j["a"] = scalar_to_json(t.a);
  j["b"] = scalar_to_json(t.b);
  j["c"] = scalar_to_json(t.c);
  return j;
}

// --- iteration traces -------------------------------------------------------
template <class S>
ordered_json trace_to_json(const IterationTrace<S>& tr) {
  ordered_json j;
  j["steps"] = tr.steps;
  j["truncation_events"] = tr.truncation_events;
  if (tr.converged_at) j["converged_at"] = *tr.converged_at;
  j["tail_monotone"] = tr.tail_monotone;
  ordered_json rows = ordered_json::array();
  for (const auto& r : tr.rows) {
    ordered_json row;
    row["step"] = r.step;
    ordered_json xs = ordered_json::array();
    for (double x : r.x) xs.push_back(x);
    row["x"] = xs;
    row["delta"] = r.delta;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["final_state"] = ratioseq_to_json(tr.final_state);
  return j;
}

template <class S>
void trace_csv_header(std::ostream& os) {
  os << "step";
  for (int i = 1; i <= 8; ++i) os << ",x" << i;
  os << ",norm_delta\n";
}

template <class S>
void trace_row_csv(std::ostream& os, const TraceRow<S>& r) {
  os << r.step;
  char buf[40];
  for (double x : r.x) {
    std::snprintf(buf, sizeof buf, ",%.17g", x);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, ",%.17g", r.delta);
  os << buf << "\n";
}

// --- graphs ------------------------------------------------------------------
inline ordered_json graph_to_json(const GraphSpec& g) {
  ordered_json j;
  ordered_json verts = ordered_json::array();
  for (Color c : g.colors) {
    ordered_json v;
    v["color"] = (c == Color::white) ? "white" : "black";
    verts.push_back(v);
  }
  j["vertices"] = verts;
  ordered_json edges = ordered_json::array();
  for (auto [u, v] : g.edges) edges.push_back(ordered_json::array({u, v}));
  j["edges"] = edges;
  j["boundary"] = g.boundary;
  ordered_json kap = ordered_json::object();
  for (const auto& [v, set] : g.kappa) kap[std::to_string(v)] = set;
  j["kappa"] = kap;
  if (g.cheeger_lower_bound) j["cheeger"] = *g.cheeger_lower_bound;
  return j;
}

inline GraphSpec graph_from_json(const ordered_json& j) {
  GraphSpec g;
  for (const auto& v : j.at("vertices")) {
    std::string c = v.at("color").get<std::string>();
    if (c != "white" && c != "black")
      throw std::invalid_argument("graph_from_json: color must be white or black");
    g.colors.push_back(c == "white" ? Color::white : Color::black);
  }
  for (const auto& e : j.at("edges"))
    g.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  if (j.contains("boundary")) g.boundary = j.at("boundary").get<std::vector<int>>();
  if (j.contains("kappa"))
    for (const auto& [key, val] : j.at("kappa").items())
      g.kappa[std::stoi(key)] = val.get<std::vector<long>>();
  if (j.contains("cheeger") && !j.at("cheeger").is_null())
    g.cheeger_lower_bound = j.at("cheeger").get<double>();
  g.validate();
  return g;
}

// --- samples and chains -------------------------------------------------------
inline ordered_json sample_to_json(const TreeLipschitzSample& s) {
  ordered_json j;
  j["n"] = s.n;
  j["d"] = s.d;
  j["full"] = s.full;
  ordered_json verts = ordered_json::array();
  for (const auto& [v, h] : s.height_by_vertex) {
    ordered_json r;
    r["level"] = v.level;
    r["index"] = v.index;
    r["height"] = h;
    verts.push_back(r);
  }
  j["heights"] = verts;
  return j;
}

inline ordered_json chain_to_json(const LimitChain& ch) {
  ordered_json j;
  j["lo"] = ch.lo;
  j["hi"] = ch.hi();
  j["pi"] = intdist_to_json(ch.pi);
  j["stationary"] = intdist_to_json(ch.stationary);
  ordered_json rows = ordered_json::array();
  for (const auto& r : ch.rows)
    rows.push_back(ordered_json::array({scalar_to_json(r[0]), scalar_to_json(r[1]),
                                        scalar_to_json(r[2])}));
  j["rows"] = rows;
  j["row_sums_one"] = ch.row_sums_one;
  j["stationarity_residual"] = to_double(ch.stationarity_residual);
  j["reversibility_residual"] = to_double(ch.reversibility_residual);
  return j;
}

inline ordered_json cluster_stats_to_json(const ClusterStats& st) {
  ordered_json j;
  j["atypical_even"] = st.atypical_even;
  j["atypical_odd"] = st.atypical_odd;
  ordered_json comps = ordered_json::array();
  for (const auto& c : st.components) comps.push_back(c);
  j["components"] = comps;
  ordered_json hist = ordered_json::object();
  for (const auto& [size, count] : st.component_sizes)
    hist[std::to_string(size)] = count;
  j["component_size_histogram"] = hist;
  return j;
}

// --- file helpers --------------------------------------------------------------
inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace liptree
