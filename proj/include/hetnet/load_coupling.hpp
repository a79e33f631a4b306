#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <stdexcept>
#include <vector>

#include "association.hpp"
#include "scenario.hpp"

namespace hetnet {

using LoadVector = std::vector<double>;   // per-cell load in (0, 1]
using PowerVector = std::vector<double>;  // per-cell mW per resource unit

enum class SolveStatus { Converged, Diverged };

struct SolverOptions {
  double tolerance{1e-9};           // max relative power change across a sweep
  double divergence_power{1e9};     // mW
  std::size_t max_sweeps{10000};
  double cell_tolerance{1e-14};     // relative accuracy of each per-cell power solve
  std::optional<std::vector<std::size_t>> sweep_order;  // default: ascending cell id
};

struct SolveResult {
  PowerVector power;
  LoadVector load;  // target load on serving cells, 0 on idle cells
  SolveStatus status{SolveStatus::Diverged};
  bool feasible{false};
  std::size_t outer_iterations{0};
  double residual{0.0};

  bool converged() const noexcept { return status == SolveStatus::Converged; }
};

// Demand in nats/s normalised by M*B.
inline double normalized_demand(const Scenario& s, std::size_t ue) {
  return s.ues[ue].demand * std::numbers::ln2 / (static_cast<double>(s.num_resource_units) * s.resource_bandwidth);
}

inline double sinr(std::size_t cell, std::size_t ue, const PowerVector& powers, const LoadVector& loads,
                   const Scenario& s) {
  double interference = s.noise_power;
  for (std::size_t k = 0; k < s.num_cells(); ++k)
    if (k != cell) interference += powers[k] * s.gain(k, ue) * loads[k];
  return powers[cell] * s.gain(cell, ue) / interference;
}

inline double load_of_cell(std::size_t cell, const PowerVector& powers, const LoadVector& loads,
                           const Association& assoc, const Scenario& s) {
  double load = 0.0;
  for (std::size_t j = 0; j < assoc.serving.size(); ++j)
    if (assoc.serving[j] == cell) load += normalized_demand(s, j) / std::log1p(sinr(cell, j, powers, loads, s));
  return load;
}

namespace detail {

// Load of one cell as a function of its own power, interference held fixed.
// Strictly decreasing and convex in p.
struct CellLoadFunction {
  std::vector<double> demand;      // normalised, per served UE
  std::vector<double> gain_ratio;  // g_ij / (interference + noise)

  double operator()(double p) const {
    double load = 0.0;
    for (std::size_t t = 0; t < demand.size(); ++t) load += demand[t] / std::log1p(p * gain_ratio[t]);
    return load;
  }

  // Load and its derivative with respect to p.
  std::pair<double, double> with_slope(double p) const {
    double load = 0.0;
    double slope = 0.0;
    for (std::size_t t = 0; t < demand.size(); ++t) {
      const double x = p * gain_ratio[t];
      const double l = std::log1p(x);
      load += demand[t] / l;
      slope -= demand[t] * gain_ratio[t] / ((1.0 + x) * l * l);
    }
    return {load, slope};
  }
};

// Power at which the load function equals `target`, or nullopt once the
// power would exceed `cap`.
//
// A point left of the root is bracketed first (starting from `start`, halving
// if needed). Newton steps from the left of a convex decreasing function never
// overshoot, so the iterate stays a lower bound; a bisection fallback keeps the
// bracket if rounding ever stalls the steps.
inline std::optional<double> solve_cell_power(const CellLoadFunction& f, double target, double cap, double rel_tol,
                                              double start = 1.0) {
  double lo = start > 0.0 ? start : 1.0;
  if (f(lo) <= target) {
    double hi = lo;
    do {
      hi = lo;
      lo /= 2.0;
      if (lo < 1e-300) return lo;
    } while (f(lo) <= target);
    // Root lies in (lo, hi]; bisect.
    while (hi - lo > rel_tol * hi) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (f(mid) > target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  for (int it = 0; it < 200; ++it) {
    const auto [load, slope] = f.with_slope(lo);
    const double excess = load - target;
    if (excess <= 0.0) return lo;
    const double next = lo - excess / slope;
    if (!(next > lo)) return lo;
    if (next > cap) return std::nullopt;
    const bool small = next - lo <= rel_tol * next;
    if (f(next) <= target) {
      // Rounding carried us past the root: bisect the final bracket.
      double l = lo, h = next;
      while (h - l > rel_tol * h) {
        const double mid = 0.5 * (l + h);
        if (mid <= l || mid >= h) break;
        (f(mid) > target ? l : h) = mid;
      }
      return 0.5 * (l + h);
    }
    lo = next;
    if (small) return lo;
  }
  return lo;
}

}  // namespace detail

// Power limits are compared with a 1e-9 relative slack so that a cell solved
// exactly onto its limit is not rejected by rounding.
inline bool check_feasible(const SolveResult& r, const Scenario& s) {
  if (!r.converged()) return false;
  for (std::size_t i = 0; i < s.num_cells(); ++i)
    if (r.load[i] > 0.0 && r.power[i] > s.cells[i].power_limit * (1.0 + 1e-9)) return false;
  return true;
}

// Power vector meeting `target_load` on every serving cell, by Gauss-Seidel
// sweeps with a one-dimensional root solve per cell. Idle cells get power 0,
// load 0 and do not interfere. Starts from zero power, so the iterates
// increase monotonically to the least fixed point.
inline SolveResult solve_power(const Scenario& s, const Association& assoc, const LoadVector& target_load,
                               const SolverOptions& opts = {}) {
  const auto n = s.num_cells();
  if (target_load.size() != n) throw std::invalid_argument("solve_power: target load must have one entry per cell");
  if (assoc.serving.size() != s.num_ues()) throw std::invalid_argument("solve_power: association size mismatch");

  const auto served = assoc.served_sets(n);
  SolveResult r;
  r.power.assign(n, 0.0);
  r.load.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (served[i].empty()) continue;
    if (!(target_load[i] > 0.0 && target_load[i] <= 1.0))
      throw std::invalid_argument("solve_power: target loads of serving cells must lie in (0, 1]");
    r.load[i] = target_load[i];
  }

  std::vector<std::size_t> order;
  if (opts.sweep_order) {
    order = *opts.sweep_order;
    if (order.size() != n) throw std::invalid_argument("solve_power: sweep order must be a permutation of cells");
  } else {
    for (std::size_t i = 0; i < n; ++i) order.push_back(i);
  }

  std::vector<detail::CellLoadFunction> fns(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto j : served[i]) fns[i].demand.push_back(normalized_demand(s, j));
    fns[i].gain_ratio.resize(served[i].size());
  }

  for (std::size_t sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (auto i : order) {
      if (served[i].empty()) continue;
      auto& f = fns[i];
      for (std::size_t t = 0; t < served[i].size(); ++t) {
        const auto j = served[i][t];
        double interference = s.noise_power;
        for (std::size_t k = 0; k < n; ++k)
          if (k != i) interference += r.power[k] * s.gain(k, j) * r.load[k];
        f.gain_ratio[t] = s.gain(i, j) / interference;
      }
      const auto p =
          detail::solve_cell_power(f, r.load[i], opts.divergence_power, opts.cell_tolerance, r.power[i]);
      if (!p) {
        r.status = SolveStatus::Diverged;
        r.outer_iterations = sweep;
        r.residual = std::numeric_limits<double>::infinity();
        return r;
      }
      max_change = std::max(max_change, std::abs(*p - r.power[i]) / *p);
      r.power[i] = *p;
    }
    r.outer_iterations = sweep;
    r.residual = max_change;
    if (max_change < opts.tolerance) {
      r.status = SolveStatus::Converged;
      r.feasible = check_feasible(r, s);
      return r;
    }
  }
  r.status = SolveStatus::Diverged;
  return r;
}

inline LoadVector full_load(const Scenario& s) { return LoadVector(s.num_cells(), 1.0); }

inline SolveResult solve_full_load(const Scenario& s, const Association& assoc, const SolverOptions& opts = {}) {
  return solve_power(s, assoc, full_load(s), opts);
}

// Load-weighted transmission energy, sum of load_i * power_i.
inline double energy(const LoadVector& loads, const PowerVector& powers) {
  if (loads.size() != powers.size()) throw std::invalid_argument("energy: size mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < loads.size(); ++i) e += loads[i] * powers[i];
  return e;
}

inline double energy(const SolveResult& r) { return energy(r.load, r.power); }

}  // namespace hetnet
