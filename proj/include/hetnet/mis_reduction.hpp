#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "association.hpp"
#include "load_coupling.hpp"
#include "scenario.hpp"
#include "tso.hpp"

namespace hetnet {

// Simple undirected graph on nodes 0..n-1.
struct Graph {
  std::size_t num_nodes{0};
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  bool has_edge(std::size_t u, std::size_t v) const {
    for (auto [a, b] : edges)
      if ((a == u && b == v) || (a == v && b == u)) return true;
    return false;
  }

  // Neighbour bitmask per node; requires num_nodes <= 64.
  std::vector<std::uint64_t> adjacency_masks() const {
    std::vector<std::uint64_t> adj(num_nodes, 0);
    for (auto [a, b] : edges) {
      adj[a] |= std::uint64_t{1} << b;
      adj[b] |= std::uint64_t{1} << a;
    }
    return adj;
  }
};

inline void validate(const Graph& g) {
  if (g.num_nodes < 2) throw std::invalid_argument("graph: at least 2 nodes are required");
  for (auto [a, b] : g.edges) {
    if (a >= g.num_nodes || b >= g.num_nodes) throw std::invalid_argument("graph: edge endpoint out of range");
    if (a == b) throw std::invalid_argument("graph: self-loops are not allowed");
  }
}

// Parses `u v` pairs, one per line, 0-indexed. Blank lines and lines starting
// with '#' are skipped; duplicate edges are dropped. The node count is the
// larger of `min_nodes` and the highest index seen plus one.
inline Graph read_edge_list(std::istream& in, std::size_t min_nodes = 0) {
  Graph g;
  g.num_nodes = min_nodes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long u = -1, v = -1;
    std::string rest;
    if (!(ls >> u >> v) || u < 0 || v < 0 || (ls >> rest))
      throw std::invalid_argument("edge list line " + std::to_string(lineno) + ": expected two node indices");
    const auto a = static_cast<std::size_t>(std::min(u, v));
    const auto b = static_cast<std::size_t>(std::max(u, v));
    g.num_nodes = std::max(g.num_nodes, b + 1);
    if (!g.has_edge(a, b)) g.edges.emplace_back(a, b);
  }
  validate(g);
  return g;
}

struct GadgetInstance {
  Graph graph;
  Scenario scenario;  // macros 0..n-1, LPNs n..2n-1, UE i belongs to node i
  double epsilon{1e-4};
  OffsetSet offset_set{kMinusInfinityDb, 0.0};
};

inline constexpr double kUnboundedPowerLimit = 1e12;  // mW, stands in for "no limit"

// Reduction gadget: node i becomes macro i, LPN i and UE i. Gains are 1/n^2
// (macro i -> UE i), 1 (LPN i -> UE i) and epsilon (LPN i -> UE j for every
// edge ij); all others are exactly zero. Noise, M, B and every demand are 1,
// so at SINR 1 a cell meets one bit/s of demand at full load, matching the
// base-2 arithmetic of the hand analysis. All pilots are equal so that an
// LPN at 0 dB takes its own UE; requires epsilon < 1/n^2 so that a
// neighbouring LPN never beats the macro.
inline GadgetInstance build_gadget(const Graph& graph, double epsilon = 1e-4) {
  validate(graph);
  const auto n = graph.num_nodes;
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  if (!(epsilon > 0.0)) throw std::invalid_argument("gadget: epsilon must be > 0");
  if (!(epsilon < 1.0 / n2)) throw std::invalid_argument("gadget: epsilon must be below 1/n^2");

  GadgetInstance g;
  g.graph = graph;
  g.epsilon = epsilon;
  auto& s = g.scenario;
  for (std::size_t i = 0; i < n; ++i)
    s.cells.push_back(Cell{i, CellKind::Macro, {static_cast<double>(i), 0.0}, 1.0, kUnboundedPowerLimit, 1.0});
  for (std::size_t i = 0; i < n; ++i)
    s.cells.push_back(Cell{n + i, CellKind::Lpn, {static_cast<double>(i), 1.0}, 1.0, 1.0, 1.0});
  for (std::size_t i = 0; i < n; ++i) s.ues.push_back(UserEquipment{i, {static_cast<double>(i), 0.5}, 1.0});
  s.gain = GainMatrix(2 * n, n);
  for (std::size_t i = 0; i < n; ++i) {
    s.gain(i, i) = 1.0 / n2;
    s.gain(n + i, i) = 1.0;
  }
  for (auto [a, b] : graph.edges) {
    s.gain(n + a, b) = epsilon;
    s.gain(n + b, a) = epsilon;
  }
  s.noise_power = 1.0;
  s.num_resource_units = 1;
  s.resource_bandwidth = 1.0;
  validate(s);
  return g;
}

// Offset vector with the given nodes' LPNs on (0 dB) and the rest off (-inf).
inline OffsetVector activation_offsets(std::size_t n, const std::vector<std::size_t>& active) {
  OffsetVector x{std::vector<std::size_t>(n, 0)};
  for (auto i : active) x.levels.at(i) = 1;
  return x;
}

inline std::vector<std::size_t> active_lpns(const OffsetVector& x) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x.levels[i] == 1) out.push_back(i);
  return out;
}

inline bool is_independent_set(const Graph& g, const std::vector<std::size_t>& nodes) {
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = a + 1; b < nodes.size(); ++b)
      if (g.has_edge(nodes[a], nodes[b])) return false;
  return true;
}

struct MisResult {
  std::size_t size{0};
  std::vector<std::size_t> nodes;  // ascending
};

// Exact maximum independent set by subset enumeration. The first maximum set
// in ascending bitmask order is returned.
inline MisResult mis_bruteforce(const Graph& g) {
  validate(g);
  if (g.num_nodes > 20) throw std::invalid_argument("mis_bruteforce: at most 20 nodes");
  const auto adj = g.adjacency_masks();
  const std::uint64_t total = std::uint64_t{1} << g.num_nodes;
  std::uint64_t best_mask = 0;
  int best_size = -1;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const int size = __builtin_popcountll(mask);
    if (size <= best_size) continue;
    bool independent = true;
    for (std::size_t v = 0; v < g.num_nodes && independent; ++v)
      if ((mask >> v & 1U) && (adj[v] & mask)) independent = false;
    if (independent) {
      best_size = size;
      best_mask = mask;
    }
  }
  MisResult r;
  r.size = static_cast<std::size_t>(best_size);
  for (std::size_t v = 0; v < g.num_nodes; ++v)
    if (best_mask >> v & 1U) r.nodes.push_back(v);
  return r;
}

struct ExhaustiveResult {
  bool found{false};  // some pattern was feasible
  OffsetVector best;
  double energy{kInfiniteObjective};
  std::vector<std::size_t> active;
  EvalRecord record;
  std::size_t patterns{0};
};

// Full-load energy of every on/off pattern; keeps the cheapest feasible one
// (first in ascending bitmask order on ties).
inline ExhaustiveResult exhaustive_offset_search(const GadgetInstance& gadget, const SolverOptions& opts = {}) {
  const auto n = gadget.graph.num_nodes;
  if (n > 16) throw std::invalid_argument("exhaustive_offset_search: at most 16 nodes");
  Evaluator ev{gadget.scenario, gadget.offset_set, opts};
  ExhaustiveResult r;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    OffsetVector x{std::vector<std::size_t>(n, 0)};
    for (std::size_t i = 0; i < n; ++i) x.levels[i] = (mask >> i) & 1U;
    auto rec = ev.evaluate(x);
    ++r.patterns;
    if (rec.feasible && rec.objective < r.energy) {
      r.found = true;
      r.energy = rec.objective;
      r.best = x;
      r.record = std::move(rec);
    }
  }
  r.active = active_lpns(r.best);
  return r;
}

struct BoundCheck {
  std::size_t k{0};
  double lower_k{0.0};        // best-possible total power with k active LPNs
  double upper_k_plus_1{0.0}; // worst-possible total power with k+1 active LPNs
  bool holds{false};          // upper_k_plus_1 < lower_k
};

inline double best_possible_power(std::size_t n, std::size_t k) {
  const double nd = static_cast<double>(n);
  return static_cast<double>(k) + static_cast<double>(n - k) * nd * nd;
}

// Worst case with `active` LPNs on: each remaining macro sees interference
// from at most `active` neighbours.
inline double worst_possible_power(std::size_t n, std::size_t active, double epsilon) {
  const double nd = static_cast<double>(n);
  const double kk = static_cast<double>(active);
  return kk + static_cast<double>(n - active) * nd * nd * (1.0 + epsilon * kk);
}

inline BoundCheck verify_bounds(std::size_t n, std::size_t k, double epsilon) {
  if (k >= n) throw std::invalid_argument("verify_bounds: k must be below n");
  const double nd = static_cast<double>(n);
  BoundCheck b;
  b.k = k;
  b.lower_k = best_possible_power(n, k);
  b.upper_k_plus_1 =
      b.lower_k + (1.0 - nd * nd + epsilon * static_cast<double>(n - k - 1) * nd * nd * static_cast<double>(k + 1));
  b.holds = b.upper_k_plus_1 < b.lower_k;
  return b;
}

inline BoundCheck verify_bounds(const GadgetInstance& g, std::size_t k) {
  return verify_bounds(g.graph.num_nodes, k, g.epsilon);
}

inline TsoConfig gadget_tso_config(const GadgetInstance& g, std::uint64_t seed = 1) {
  auto cfg = TsoConfig::for_lpn_count(g.graph.num_nodes);
  cfg.offset_set = g.offset_set;
  cfg.rng_seed = seed;
  return cfg;
}

}  // namespace hetnet
