#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hetnet/generate.hpp"
#include "hetnet/mis_reduction.hpp"
#include "hetnet/tso.hpp"

using namespace hetnet;

namespace {

constexpr auto M = CellKind::Macro;
constexpr auto L = CellKind::Lpn;
constexpr double kLn2 = std::numbers::ln2;

// Enumerates every offset vector and returns the lowest feasible objective.
double exhaustive_best(const Scenario& s, const OffsetSet& set) {
  const auto m = s.num_lpns();
  Evaluator ev{s, set};
  double best = kInfiniteObjective;
  OffsetVector x{std::vector<std::size_t>(m, 0)};
  for (;;) {
    const auto rec = ev.evaluate(x);
    if (rec.feasible) best = std::min(best, rec.objective);
    std::size_t i = 0;
    while (i < m && ++x.levels[i] == set.size()) x.levels[i++] = 0;
    if (i == m) break;
  }
  return best;
}

Scenario small_generated(std::uint64_t seed, std::size_t lpns = 2) {
  ScenarioConfig cfg;
  cfg.num_macro_sites = 1;
  cfg.lpns_per_site = lpns;
  cfg.ues_per_site = 12;
  cfg.rng_seed = seed;
  return generate_scenario(cfg);
}

Graph path3() { return Graph{3, {{0, 1}, {1, 2}}}; }

}  // namespace

TEST(Neighborhood, InteriorAndBoundaryPositions) {
  EXPECT_EQ(neighborhood(OffsetVector{{3, 5}}, 11).size(), 4u);
  const auto nb = neighborhood(OffsetVector{{0, 10}}, 11);
  ASSERT_EQ(nb.size(), 2u);
  EXPECT_EQ(nb[0].offsets.levels, (std::vector<std::size_t>{1, 10}));
  EXPECT_EQ(nb[0].direction, +1);
  EXPECT_EQ(nb[1].offsets.levels, (std::vector<std::size_t>{0, 9}));
  EXPECT_EQ(nb[1].position, 1u);
  EXPECT_EQ(neighborhood(OffsetVector{std::vector<std::size_t>(14, 5)}, 11).size(), 28u);
  EXPECT_TRUE(neighborhood(OffsetVector{{0}}, 1).empty());
}

TEST(Neighborhood, NeverContainsTheCurrentVector) {
  const OffsetVector x{{2, 7, 0}};
  for (const auto& nb : neighborhood(x, 11)) {
    EXPECT_NE(nb.offsets.levels, x.levels);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < x.size(); ++i) diff += nb.offsets.levels[i] != x.levels[i];
    EXPECT_EQ(diff, 1u);
  }
}

TEST(AssociationNeighborhood, EveryMoveChangesTheAssociation) {
  const auto s = small_generated(3, 3);
  const PilotTable t{s};
  const auto set = default_offset_set();
  for (const auto& x : {OffsetVector{{0, 0, 0}}, OffsetVector{{5, 2, 10}}}) {
    const auto here = associate(t, x, set);
    const auto nbs = association_neighborhood(t, x, set);
    for (const auto& nb : nbs) {
      EXPECT_NE(associate(t, nb.offsets, set), here);
      // Every level strictly between x and the neighbour leaves it unchanged.
      auto mid = x;
      while (true) {
        mid.levels[nb.position] = nb.direction < 0 ? mid.levels[nb.position] - 1 : mid.levels[nb.position] + 1;
        if (mid.levels[nb.position] == nb.offsets.levels[nb.position]) break;
        EXPECT_EQ(associate(t, mid, set), here);
      }
    }
  }
}

TEST(Evaluate, IdenticalAssociationsGiveIdenticalObjectives) {
  const auto s = small_generated(5);
  const auto set = default_offset_set();
  Evaluator ev{s, set};
  const auto a = ev.evaluate(OffsetVector{{0, 0}});
  for (std::size_t l0 = 0; l0 < set.size(); ++l0) {
    for (std::size_t l1 = 0; l1 < set.size(); ++l1) {
      const auto b = ev.evaluate(OffsetVector{{l0, l1}});
      if (b.association == a.association) {
        EXPECT_EQ(b.objective, a.objective);
      }
    }
  }
  EXPECT_LT(ev.solves(), ev.lookups());
}

TEST(Evaluate, SingleCellClosedForm) {
  const auto s = fixture::toy({M, L}, {{0.5, 0.2}, {0.0, 0.0}}, {0.3, 0.6}, 0.1);
  const auto rec = evaluate(s, OffsetVector{{0}}, default_offset_set());
  // Macro alone at full load: sum_j r_j / ln(1 + p g_j / noise) = 1.
  const auto served = std::vector<double>{0.5, 0.2};
  double lo = 0.0, hi = 1e6;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double load = 0.3 / std::log1p(mid * served[0] / 0.1) + 0.6 / std::log1p(mid * served[1] / 0.1);
    (load > 1.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(rec.objective, hi, 1e-7 * hi);
  EXPECT_TRUE(rec.feasible);
  EXPECT_EQ(rec.violation, 0.0);
}

TEST(Evaluate, GadgetPatterns) {
  const auto g = build_gadget(path3());
  // LPNs 0 and 2 at unit power; macro 1 needs n^2 (1 + 2 epsilon).
  const auto independent = evaluate(g.scenario, activation_offsets(3, {0, 2}), g.offset_set);
  EXPECT_TRUE(independent.feasible);
  EXPECT_NEAR(independent.objective, 2.0 + 9.0 * (1.0 + 2e-4), 1e-9);
  // Adjacent LPNs interfere and both exceed the unit limit.
  const auto all_on = evaluate(g.scenario, activation_offsets(3, {0, 1, 2}), g.offset_set);
  EXPECT_FALSE(all_on.feasible);
  EXPECT_GT(all_on.violation, 0.0);
  const auto all_off = evaluate(g.scenario, activation_offsets(3, {}), g.offset_set);
  EXPECT_TRUE(all_off.feasible);
  EXPECT_NEAR(all_off.objective, 27.0, 1e-9);
}

TEST(Violation, PositiveExactlyWhenInfeasible) {
  // One macro with limit 50; the UE needs power 1/g at full load.
  for (double p : {10.0, 49.0, 51.0, 1e4}) {
    const auto s = fixture::toy({M}, {{1.0 / p}}, {kLn2}, 1.0, {50.0});
    const auto rec = evaluate(s, OffsetVector{}, default_offset_set());
    EXPECT_EQ(rec.feasible, p < 50.0);
    if (p < 50.0) {
      EXPECT_EQ(rec.violation, 0.0);
    }
    // At the limit the load demanded is ln2 / ln(1 + 50 / p).
    if (p > 50.0) {
      EXPECT_NEAR(rec.violation, kLn2 / std::log1p(50.0 / p) - 1.0, 1e-9);
    }
  }
}

TEST(Violation, DivergedAssociationsStillRank) {
  const auto s = fixture::toy({M, M}, {{1.0, 1.0}, {1.0, 1.0}}, {kLn2, kLn2}, 1.0, {10.0, 10.0});
  const auto sol = solve_full_load(s, fixture::serve({0, 1}));
  EXPECT_FALSE(sol.converged());
  EXPECT_GT(limit_violation(fixture::serve({0, 1}), s), 0.0);
  EXPECT_EQ(limit_violation(fixture::serve({0, 0}), s), 0.0);
}

TEST(Tso, MatchesExhaustiveOptimumOnSmallScenarios) {
  const OffsetSet set{0.0, 3.0, 6.0, 9.0};
  std::size_t matched = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto s = small_generated(seed, 2);
    const double best = exhaustive_best(s, set);
    if (!std::isfinite(best)) continue;
    auto cfg = TsoConfig::for_lpn_count(2);
    cfg.offset_set = set;
    cfg.rng_seed = seed;
    const auto r = optimize(s, cfg);
    ASSERT_EQ(r.outcome, TsoOutcome::Feasible);
    EXPECT_GE(r.best_energy, best * (1.0 - 1e-12));
    matched += r.best_energy <= best * (1.0 + 1e-9);
    ++total;
  }
  ASSERT_GT(total, 0u);
  EXPECT_EQ(matched, total);
}

TEST(Tso, SingleLpnPicksTheCheaperLevel) {
  // UE 0 near the macro, UE 1 near the LPN. Switching the LPN off puts both
  // UEs on the macro, which costs more.
  const auto s = fixture::toy({M, L}, {{1.0, 0.01}, {0.01, 1.0}}, {0.5, 0.5}, 0.1);
  const OffsetSet set{kMinusInfinityDb, 0.0};
  auto cfg = TsoConfig::for_lpn_count(1);
  cfg.offset_set = set;
  const auto r = optimize(s, cfg);
  ASSERT_EQ(r.outcome, TsoOutcome::Feasible);
  EXPECT_EQ(r.best.levels, std::vector<std::size_t>{1});
  EXPECT_NEAR(r.best_energy, exhaustive_best(s, set), 1e-9);
}

TEST(Tso, GadgetOnPathActivatesTheIndependentSet) {
  const auto g = build_gadget(path3());
  const auto r = optimize(g.scenario, gadget_tso_config(g));
  ASSERT_EQ(r.outcome, TsoOutcome::Feasible);
  EXPECT_EQ(active_lpns(r.best), (std::vector<std::size_t>{0, 2}));
  EXPECT_NEAR(r.best_energy, exhaustive_offset_search(g).energy, 1e-9);
}

TEST(Tso, DeterministicForFixedSeed) {
  ScenarioConfig cfg;
  cfg.rng_seed = 6;
  const auto s = generate_scenario(cfg);
  const auto tc = TsoConfig::for_lpn_count(s.num_lpns());
  const auto a = optimize(s, tc);
  const auto b = optimize(s, tc);
  EXPECT_EQ(a.best.levels, b.best.levels);
  EXPECT_EQ(a.best_energy, b.best_energy);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t t = 0; t < a.trace.size(); ++t) {
    EXPECT_EQ(a.trace[t].moved_position, b.trace[t].moved_position);
    EXPECT_EQ(a.trace[t].candidate_energy, b.trace[t].candidate_energy);
  }
  auto threaded = tc;
  threaded.threads = 4;
  EXPECT_EQ(optimize(s, threaded).best.levels, a.best.levels);
}

class TsoInvariants : public ::testing::TestWithParam<bool> {};

TEST_P(TsoInvariants, TraceAndIncumbent) {
  const bool plain = GetParam();
  for (std::uint64_t seed : {2, 9}) {
    ScenarioConfig sc;
    sc.rng_seed = seed;
    sc.demand = 400e3;
    const auto s = generate_scenario(sc);
    auto cfg = TsoConfig::for_lpn_count(s.num_lpns());
    cfg.rng_seed = seed;
    if (plain) cfg.use_plain_rules();
    const auto r = optimize(s, cfg);
    ASSERT_FALSE(r.trace.empty());
    EXPECT_GE(r.trace.size(), cfg.alpha);
    // Both tenure rules mark the moved position with beta before the snapshot.
    const std::size_t mark = cfg.beta;
    for (const auto& e : r.trace) {
      EXPECT_EQ(e.tabu_snapshot[e.moved_position], mark);
      EXPECT_EQ(std::count(e.tabu_snapshot.begin(), e.tabu_snapshot.end(), mark), 1);
      for (auto t : e.tabu_snapshot) EXPECT_LE(t, cfg.beta);
      EXPECT_LE(e.k, cfg.alpha + 1);
    }
    for (std::size_t t = 1; t < r.trace.size(); ++t) EXPECT_LE(r.trace[t].best_energy, r.trace[t - 1].best_energy);
    EXPECT_GT(r.trace.back().k, cfg.alpha);

    const auto base = evaluate_baselines(s);
    if (r.outcome == TsoOutcome::Feasible) {
      const auto fresh = evaluate(s, r.best, cfg.offset_set);
      EXPECT_TRUE(fresh.feasible);
      EXPECT_EQ(fresh.objective, r.best_energy);
      if (base.zero_offset.feasible) {
        EXPECT_LE(r.best_energy, base.zero_offset.objective);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Rules, TsoInvariants, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? "Plain" : "Extended"; });

TEST(Tso, TenureKeepsAPositionTabuForBetaSteps) {
  ScenarioConfig sc;
  sc.rng_seed = 4;
  const auto s = generate_scenario(sc);
  auto cfg = TsoConfig::for_lpn_count(s.num_lpns());
  const auto r = optimize(s, cfg);
  // A position moved at step t is not moved again before step t + beta unless
  // it aspired.
  for (std::size_t t = 0; t < r.trace.size(); ++t)
    for (std::size_t u = t + 1; u < std::min(r.trace.size(), t + cfg.beta); ++u)
      if (r.trace[u].moved_position == r.trace[t].moved_position) {
        EXPECT_TRUE(r.trace[u].aspiration);
      }
}

TEST(Tso, FindsFeasibleWhenMaxOffsetOverloadsTheLpn) {
  // Two UEs next to an LPN with a tiny limit. At 0 dB the macro serves both;
  // at +10 dB the LPN grabs both and exceeds its limit.
  const auto s = fixture::toy({M, L}, {{1.0, 1.0}, {0.5, 0.5}}, {0.4, 0.4}, 0.1, {200.0, 0.05});
  const auto base = evaluate_baselines(s);
  ASSERT_TRUE(base.zero_offset.feasible);
  ASSERT_FALSE(base.max_offset.feasible);
  EXPECT_GT(base.max_offset.violation, 0.0);
  const auto r = optimize(s, TsoConfig::for_lpn_count(1));
  EXPECT_EQ(r.outcome, TsoOutcome::Feasible);
  EXPECT_LE(r.best_energy, base.zero_offset.objective);
}

TEST(Tso, ReportsNoFeasibleSolution) {
  const auto s = fixture::toy({M, L}, {{1.0, 1.0}, {0.5, 0.5}}, {0.4, 0.4}, 0.1, {0.01, 0.01});
  const auto r = optimize(s, TsoConfig::for_lpn_count(1));
  EXPECT_EQ(r.outcome, TsoOutcome::NoFeasibleSolution);
  EXPECT_TRUE(std::isinf(r.best_energy));
  EXPECT_GT(r.best_record.violation, 0.0);
}

TEST(Tso, RandomInitIsSeeded) {
  const auto s = small_generated(7, 3);
  auto cfg = TsoConfig::for_lpn_count(3);
  cfg.init = TsoInit::Random;
  cfg.rng_seed = 10;
  TabuSearch a{s, cfg}, b{s, cfg};
  EXPECT_EQ(a.state().current.levels, b.state().current.levels);
  for (auto level : a.state().current.levels) EXPECT_LT(level, cfg.offset_set.size());
}

TEST(Tso, NoLpnsReturnsTheMacroSolution) {
  ScenarioConfig sc;
  sc.num_macro_sites = 1;
  sc.lpns_per_site = 0;
  sc.ues_per_site = 5;
  const auto s = generate_scenario(sc);
  const auto r = optimize(s, TsoConfig::for_lpn_count(0));
  EXPECT_EQ(r.outcome, TsoOutcome::Feasible);
  EXPECT_TRUE(r.trace.empty());
  EXPECT_TRUE(r.best.levels.empty());
}

TEST(TsoConfig, DefaultsScaleWithLpnCount) {
  const auto c14 = TsoConfig::for_lpn_count(14);
  EXPECT_EQ(c14.alpha, 140u);
  EXPECT_EQ(c14.beta, 4u);
  EXPECT_EQ(TsoConfig::for_lpn_count(1).beta, 1u);
  EXPECT_EQ(TsoConfig::for_lpn_count(9).beta, 3u);
  EXPECT_EQ(TsoConfig::for_lpn_count(0).alpha, 1u);
  auto plain = c14;
  plain.use_plain_rules();
  EXPECT_FALSE(plain.prefer_feasible);
  EXPECT_FALSE(plain.skip_null_moves);
  EXPECT_FALSE(plain.full_tenure);
}
