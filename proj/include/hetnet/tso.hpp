#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "association.hpp"
#include "load_coupling.hpp"
#include "random.hpp"
#include "scenario.hpp"

namespace hetnet {

inline constexpr double kInfiniteObjective = std::numeric_limits<double>::infinity();

enum class TsoInit { ZeroOffset, Random };

struct TsoConfig {
  OffsetSet offset_set = default_offset_set();
  std::size_t alpha{140};  // non-improving steps tolerated before stopping
  std::size_t beta{4};     // tabu tenure
  TsoInit init{TsoInit::ZeroOffset};
  std::uint64_t rng_seed{1};
  SolverOptions solver{};
  std::size_t threads{1};  // workers for candidate evaluation
  // Rank feasible candidates ahead of infeasible ones, and infeasible ones by
  // how far they exceed the power limits, before comparing objectives. Off
  // gives the plain argmin over the objective.
  bool prefer_feasible{true};
  // Move each position to the nearest level, in each direction, that changes
  // the association, instead of exactly one level. Off gives the plain
  // one-level neighbourhood.
  bool skip_null_moves{true};
  // Keep a moved position tabu for the next `beta` iterations. Off applies
  // the decrement after setting the entry, which leaves beta - 1.
  bool full_tenure{true};

  // Turns off prefer_feasible, skip_null_moves and full_tenure.
  void use_plain_rules() {
    prefer_feasible = false;
    skip_null_moves = false;
    full_tenure = false;
  }

  // alpha = 10 m, beta = ceil(sqrt(m)) for m LPNs.
  static TsoConfig for_lpn_count(std::size_t m) {
    TsoConfig c;
    c.alpha = std::max<std::size_t>(1, 10 * m);
    c.beta = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
    return c;
  }
};

inline void validate(const TsoConfig& c) {
  if (c.alpha < 1) throw std::invalid_argument("tso: alpha must be >= 1");
  validate(c.offset_set);
}

// One evaluated offset vector. `objective` is the full-load sum power, or
// +inf when the power iteration diverged.
struct EvalRecord {
  OffsetVector offsets;
  bool lpn_enabled{true};
  Association association;
  SolveResult solve;
  double objective{kInfiniteObjective};
  bool feasible{false};
  double violation{0.0};  // limit_violation() of the association; 0 when feasible
};

// Overload with every serving cell at its power limit: the load fixed point
// nu = min(1, f(nu)) is found by monotone iteration from zero and the demanded
// loads f(nu) in excess of 1 are summed. Positive for every infeasible
// association, including diverged ones, so it ranks infeasible points where
// the objective cannot.
inline double limit_violation(const Association& assoc, const Scenario& s, std::size_t max_iterations = 200) {
  const auto n = s.num_cells();
  PowerVector p(n, 0.0);
  std::vector<char> serving(n, 0);
  for (auto c : assoc.serving) serving[c] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (serving[i]) p[i] = s.cells[i].power_limit;
  LoadVector nu(n, 0.0), demanded(n, 0.0);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!serving[i]) continue;
      demanded[i] = load_of_cell(i, p, nu, assoc, s);
      const double next = std::min(1.0, demanded[i]);
      change = std::max(change, next - nu[i]);
      nu[i] = next;
    }
    if (change < 1e-12) break;
  }
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (serving[i]) v += std::max(0.0, demanded[i] - 1.0);
  return v;
}

inline double full_load_objective(const SolveResult& r) {
  if (!r.converged()) return kInfiniteObjective;
  double sum = 0.0;
  for (auto p : r.power) sum += p;
  return sum;
}

// Memoising evaluator. Results are keyed by association, since the
// association alone determines the full-load power vector.
class Evaluator {
 public:
  Evaluator(const Scenario& s, OffsetSet set, SolverOptions opts = {})
      : scenario_{&s}, pilots_{s}, set_{std::move(set)}, opts_{std::move(opts)} {}

  const Scenario& scenario() const noexcept { return *scenario_; }
  const OffsetSet& offset_set() const noexcept { return set_; }
  const PilotTable& pilots() const noexcept { return pilots_; }

  EvalRecord evaluate(const OffsetVector& x, bool lpn_enabled = true) {
    auto assoc = associate(pilots_, x, set_, lpn_enabled);
    return record(x, lpn_enabled, std::move(assoc));
  }

  // Evaluates a batch, solving uncached associations on up to `threads` workers.
  std::vector<EvalRecord> evaluate_all(const std::vector<OffsetVector>& xs, std::size_t threads) {
    std::vector<Association> assocs;
    assocs.reserve(xs.size());
    for (const auto& x : xs) assocs.push_back(associate(pilots_, x, set_));

    std::vector<std::size_t> pending;
    for (std::size_t t = 0; t < assocs.size(); ++t) {
      if (cache_.count(assocs[t].serving)) continue;
      bool dup = false;
      for (auto q : pending) dup = dup || assocs[q] == assocs[t];
      if (!dup) pending.push_back(t);
    }
    std::vector<Solved> solved(pending.size());
    auto work = [&](std::size_t worker, std::size_t workers) {
      for (std::size_t q = worker; q < pending.size(); q += workers) solved[q] = solve(assocs[pending[q]]);
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, pending.size()));
    if (workers == 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
      for (auto& th : pool) th.join();
    }
    for (std::size_t q = 0; q < pending.size(); ++q) {
      ++solves_;
      cache_.emplace(assocs[pending[q]].serving, std::make_shared<const Solved>(std::move(solved[q])));
    }

    std::vector<EvalRecord> out;
    out.reserve(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) out.push_back(record(xs[t], true, std::move(assocs[t])));
    return out;
  }

  std::size_t solves() const noexcept { return solves_; }
  std::size_t lookups() const noexcept { return lookups_; }

 private:
  struct Solved {
    SolveResult result;
    double violation{0.0};
  };

  Solved solve(const Association& assoc) const {
    Solved out{solve_full_load(*scenario_, assoc, opts_), 0.0};
    if (!out.result.feasible) out.violation = limit_violation(assoc, *scenario_);
    return out;
  }

  EvalRecord record(const OffsetVector& x, bool lpn_enabled, Association assoc) {
    ++lookups_;
    auto it = cache_.find(assoc.serving);
    if (it == cache_.end()) {
      ++solves_;
      auto r = std::make_shared<const Solved>(solve(assoc));
      it = cache_.emplace(assoc.serving, std::move(r)).first;
    }
    EvalRecord rec;
    rec.offsets = x;
    rec.lpn_enabled = lpn_enabled;
    rec.association = std::move(assoc);
    rec.solve = it->second->result;
    rec.objective = full_load_objective(rec.solve);
    rec.feasible = rec.solve.feasible;
    rec.violation = it->second->violation;
    return rec;
  }

  const Scenario* scenario_;
  PilotTable pilots_;
  OffsetSet set_;
  SolverOptions opts_;
  std::map<std::vector<std::size_t>, std::shared_ptr<const Solved>> cache_;
  std::size_t solves_{0};
  std::size_t lookups_{0};
};

// Uncached single evaluation.
inline EvalRecord evaluate(const Scenario& s, const OffsetVector& x, const OffsetSet& set,
                           const SolverOptions& opts = {}) {
  Evaluator ev{s, set, opts};
  return ev.evaluate(x);
}

struct Neighbor {
  OffsetVector offsets;
  std::size_t position{0};  // modified LPN slot
  int direction{0};         // -1 or +1 level
};

// Vectors one level away from `x` in exactly one position, ordered by
// position, then downward move before upward move.
inline std::vector<Neighbor> neighborhood(const OffsetVector& x, std::size_t num_levels) {
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.levels[i] > 0) {
      Neighbor nb{x, i, -1};
      --nb.offsets.levels[i];
      out.push_back(std::move(nb));
    }
    if (x.levels[i] + 1 < num_levels) {
      Neighbor nb{x, i, +1};
      ++nb.offsets.levels[i];
      out.push_back(std::move(nb));
    }
  }
  return out;
}

// Like neighborhood(), but each move continues past levels that leave the
// association of `x` unchanged and stops at the first level that changes it.
// A direction with no such level yields no neighbour.
inline std::vector<Neighbor> association_neighborhood(const PilotTable& pilots, const OffsetVector& x,
                                                      const OffsetSet& set) {
  const auto here = associate(pilots, x, set);
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int dir : {-1, +1}) {
      Neighbor nb{x, i, dir};
      auto& level = nb.offsets.levels[i];
      while ((dir < 0 && level > 0) || (dir > 0 && level + 1 < set.size())) {
        level = dir < 0 ? level - 1 : level + 1;
        if (associate(pilots, nb.offsets, set) != here) {
          out.push_back(std::move(nb));
          break;
        }
      }
    }
  }
  return out;
}

struct TsoTraceEntry {
  std::size_t iteration{0};
  std::size_t moved_position{0};
  double candidate_energy{kInfiniteObjective};
  double best_energy{kInfiniteObjective};
  std::size_t k{0};
  std::vector<std::size_t> tabu_snapshot;  // table right after the move is marked
  bool aspiration{false};                  // chosen move was tabu and admitted by aspiration
};

struct TsoState {
  OffsetVector current;
  OffsetVector best;
  PowerVector best_power;
  double best_energy{kInfiniteObjective};  // +inf until a feasible vector is seen
  std::vector<std::size_t> tabu;
  std::size_t stall_counter{0};
  std::size_t iteration{0};
};

enum class TsoOutcome { Feasible, NoFeasibleSolution };

struct TsoResult {
  TsoOutcome outcome{TsoOutcome::NoFeasibleSolution};
  OffsetVector best;
  PowerVector best_power;
  double best_energy{kInfiniteObjective};
  EvalRecord best_record;  // when no feasible one exists: the best-ranked record seen
  std::vector<TsoTraceEntry> trace;
  std::size_t solves{0};
};

// Tabu search over LPN offset levels. Each step moves to the best admissible
// neighbour: non-tabu positions, plus tabu ones whose objective beats the best
// feasible objective so far. Unless `prefer_feasible` is off, "best" ranks
// feasible neighbours first and infeasible ones by limit violation; infeasible
// neighbours are still taken when nothing feasible is admissible. The moved
// position stays tabu for `beta` iterations. The best is replaced only by a
// strictly better vector that also respects every power limit. Stops after
// `alpha` consecutive non-improving steps; before any feasible point is
// found, a smaller violation also counts as improving.
class TabuSearch {
 public:
  TabuSearch(const Scenario& s, TsoConfig cfg) : cfg_{std::move(cfg)}, eval_{s, cfg_.offset_set, cfg_.solver} {
    validate(cfg_);
    const auto m = s.num_lpns();
    if (cfg_.init == TsoInit::Random) {
      RandomStream rng{cfg_.rng_seed};
      state_.current.levels.resize(m);
      for (auto& level : state_.current.levels) level = rng.below(cfg_.offset_set.size());
    } else {
      state_.current = all_zero(m, cfg_.offset_set);
    }
    state_.tabu.assign(m, 0);
    auto rec = eval_.evaluate(state_.current);
    fallback_ = rec;
    state_.best = state_.current;
    if (rec.feasible) {
      state_.best_power = rec.solve.power;
      state_.best_energy = rec.objective;
      best_record_ = rec;
    }
  }

  // Candidate order. With `prefer_feasible`: feasible first, then smaller
  // power-limit violation, then lower objective. Otherwise objective only.
  bool ranks_before(const EvalRecord& a, const EvalRecord& b) const {
    if (cfg_.prefer_feasible) {
      if (a.feasible != b.feasible) return a.feasible;
      if (!a.feasible && a.violation != b.violation) return a.violation < b.violation;
    }
    return a.objective < b.objective;
  }

  const TsoState& state() const noexcept { return state_; }
  const TsoConfig& config() const noexcept { return cfg_; }
  bool done() const noexcept { return done_; }
  Evaluator& evaluator() noexcept { return eval_; }

  // One iteration; returns false once the search has terminated.
  bool step() {
    if (done_) return false;
    auto nbrs = cfg_.skip_null_moves ? association_neighborhood(eval_.pilots(), state_.current, cfg_.offset_set)
                                     : neighborhood(state_.current, cfg_.offset_set.size());
    if (nbrs.empty()) {
      done_ = true;
      return false;
    }
    std::vector<OffsetVector> xs;
    xs.reserve(nbrs.size());
    for (const auto& nb : nbrs) xs.push_back(nb.offsets);
    auto recs = eval_.evaluate_all(xs, cfg_.threads);

    // Equal objectives are common (most one-level moves leave the association
    // unchanged); ties are broken uniformly at random from the seeded stream.
    std::optional<std::size_t> chosen;
    bool aspired = false;
    std::size_t ties = 0;
    for (std::size_t t = 0; t < nbrs.size(); ++t) {
      const bool is_tabu = state_.tabu[nbrs[t].position] > 0;
      // Aspiration needs an incumbent: with no feasible best yet, tabu holds.
      const bool aspires = std::isfinite(state_.best_energy) && recs[t].objective < state_.best_energy;
      const bool admissible = !is_tabu || aspires;
      if (!admissible) continue;
      const bool better = !chosen || ranks_before(recs[t], recs[*chosen]);
      const bool tie = chosen && !ranks_before(recs[t], recs[*chosen]) && !ranks_before(recs[*chosen], recs[t]);
      if (better) ties = 1;
      if (tie) ++ties;
      if (better || (tie && rng_.below(ties) == 0)) {
        chosen = t;
        aspired = is_tabu;
      }
    }
    if (!chosen) {
      // Every neighbour is tabu and none aspires: take the shortest remaining tenure.
      for (std::size_t t = 0; t < nbrs.size(); ++t) {
        if (!chosen) {
          chosen = t;
          continue;
        }
        const auto tt = state_.tabu[nbrs[t].position];
        const auto tc = state_.tabu[nbrs[*chosen].position];
        if (tt < tc || (tt == tc && recs[t].objective < recs[*chosen].objective)) chosen = t;
      }
      aspired = false;
    }

    const auto& nb = nbrs[*chosen];
    const auto& rec = recs[*chosen];
    if (cfg_.full_tenure)
      for (auto& t : state_.tabu)
        if (t > 0) --t;
    state_.tabu[nb.position] = cfg_.beta;

    if (rec.objective < state_.best_energy && rec.feasible) {
      state_.best = nb.offsets;
      state_.best_power = rec.solve.power;
      state_.best_energy = rec.objective;
      state_.stall_counter = 0;
      best_record_ = rec;
    } else if (!best_record_ && ranks_before(rec, fallback_)) {
      // No feasible point yet: progress towards feasibility also counts.
      fallback_ = rec;
      state_.stall_counter = cfg_.prefer_feasible ? 0 : state_.stall_counter + 1;
    } else {
      ++state_.stall_counter;
    }

    ++state_.iteration;
    trace_.push_back(TsoTraceEntry{state_.iteration, nb.position, rec.objective, state_.best_energy,
                                   state_.stall_counter, state_.tabu, aspired});

    if (!cfg_.full_tenure)
      for (auto& t : state_.tabu)
        if (t > 0) --t;
    state_.current = nb.offsets;

    if (state_.stall_counter > cfg_.alpha) done_ = true;
    return !done_;
  }

  TsoResult run() {
    while (step()) {
    }
    return result();
  }

  TsoResult result() const {
    TsoResult r;
    r.trace = trace_;
    r.solves = eval_.solves();
    if (best_record_) {
      r.outcome = TsoOutcome::Feasible;
      r.best = state_.best;
      r.best_power = state_.best_power;
      r.best_energy = state_.best_energy;
      r.best_record = *best_record_;
    } else {
      r.outcome = TsoOutcome::NoFeasibleSolution;
      r.best = fallback_.offsets;
      r.best_power = fallback_.solve.power;
      r.best_energy = kInfiniteObjective;
      r.best_record = fallback_;
    }
    return r;
  }

 private:
  TsoConfig cfg_;
  Evaluator eval_;
  TsoState state_;
  EvalRecord fallback_;
  std::optional<EvalRecord> best_record_;
  std::vector<TsoTraceEntry> trace_;
  RandomStream rng_{mix_seed(cfg_.rng_seed, 1)};
  bool done_{false};
};

struct Baselines {
  EvalRecord zero_offset;
  EvalRecord max_offset;
  EvalRecord no_lpn;
};

inline Baselines evaluate_baselines(const Scenario& s, const OffsetSet& set = default_offset_set(),
                                    const SolverOptions& opts = {}) {
  Evaluator ev{s, set, opts};
  const auto m = s.num_lpns();
  return Baselines{ev.evaluate(all_zero(m, set)), ev.evaluate(all_max(m, set)), ev.evaluate(all_zero(m, set), false)};
}

// Runs the search. Without LPNs there is nothing to optimise and the
// macro-only evaluation is returned directly.
inline TsoResult optimize(const Scenario& s, const TsoConfig& cfg) {
  if (s.num_lpns() == 0) {
    Evaluator ev{s, cfg.offset_set, cfg.solver};
    auto rec = ev.evaluate(OffsetVector{});
    TsoResult r;
    r.outcome = rec.feasible ? TsoOutcome::Feasible : TsoOutcome::NoFeasibleSolution;
    r.best = rec.offsets;
    r.best_power = rec.solve.power;
    r.best_energy = rec.feasible ? rec.objective : kInfiniteObjective;
    r.best_record = rec;
    r.solves = ev.solves();
    return r;
  }
  TabuSearch search{s, cfg};
  return search.run();
}

}  // namespace hetnet
