#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "association.hpp"
#include "generate.hpp"
#include "io.hpp"
#include "load_coupling.hpp"
#include "scenario.hpp"
#include "tso.hpp"

namespace hetnet {

// OO: tabu-optimised offsets; ZO / MO: every LPN at the lowest / highest
// offset; NL: LPNs switched off.
enum class Policy { OO, ZO, MO, NL };

inline const std::vector<Policy>& all_policies() {
  static const std::vector<Policy> v{Policy::OO, Policy::ZO, Policy::MO, Policy::NL};
  return v;
}

inline std::string to_string(Policy p) {
  switch (p) {
    case Policy::OO: return "OO";
    case Policy::ZO: return "ZO";
    case Policy::MO: return "MO";
    case Policy::NL: return "NL";
  }
  return "?";
}

inline Policy policy_from_string(const std::string& s) {
  for (auto p : all_policies())
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown policy '" + s + "' (expected OO, ZO, MO or NL)");
}

inline std::vector<double> default_demand_sweep() {
  std::vector<double> d;
  for (int kbps = 100; kbps <= 550; kbps += 50) d.push_back(kbps * 1e3);
  return d;
}

struct ExperimentSpec {
  ScenarioConfig scenario;                // seed s uses rng_seed = scenario.rng_seed + s
  std::optional<Scenario> fixed_scenario; // when set, used for every seed instead of generation
  std::vector<double> demands = default_demand_sweep();
  std::vector<Policy> policies = all_policies();
  std::size_t num_seeds{10};
  OffsetSet offset_set = default_offset_set();
  std::optional<std::size_t> alpha;  // default 10 m
  std::optional<std::size_t> beta;   // default ceil(sqrt(m))
  TsoInit init{TsoInit::ZeroOffset};
  bool plain_tso{false};  // TsoConfig::use_plain_rules()
  SolverOptions solver{};
  std::size_t workers{1};
  bool record_timing{false};
};

inline void validate(const ExperimentSpec& spec) {
  if (spec.num_seeds < 1) throw std::invalid_argument("experiment: num_seeds must be >= 1");
  if (spec.demands.empty()) throw std::invalid_argument("experiment: demand sweep is empty");
  for (std::size_t k = 0; k < spec.demands.size(); ++k) {
    if (!(spec.demands[k] > 0.0)) throw std::invalid_argument("experiment: demands must be positive");
    if (k > 0 && !(spec.demands[k] > spec.demands[k - 1]))
      throw std::invalid_argument("experiment: demands must be strictly ascending");
  }
  if (spec.policies.empty()) throw std::invalid_argument("experiment: no policies selected");
  validate(spec.offset_set);
  if (!spec.fixed_scenario) validate(spec.scenario);
}

struct ResultRow {
  std::uint64_t seed{0};
  double demand{0.0};  // bps
  Policy policy{Policy::ZO};
  double total_energy{kInfiniteObjective};  // mW per RU, load-weighted; +inf when diverged
  std::vector<double> per_cell_energy;
  bool feasible{false};
  bool converged{false};
  std::size_t tso_iterations{0};
  std::vector<double> offsets_db;  // empty for NL
  double wall_time{0.0};           // seconds; only exported when timing is recorded

  bool operator==(const ResultRow&) const = default;
};

using ResultTable = std::vector<ResultRow>;

inline std::uint64_t seed_for(const ExperimentSpec& spec, std::size_t seed_index) {
  return spec.scenario.rng_seed + seed_index;
}

inline TsoConfig tso_config_for(const ExperimentSpec& spec, std::size_t num_lpns, std::uint64_t seed) {
  auto cfg = TsoConfig::for_lpn_count(num_lpns);
  if (spec.alpha) cfg.alpha = *spec.alpha;
  if (spec.beta) cfg.beta = *spec.beta;
  cfg.offset_set = spec.offset_set;
  cfg.init = spec.init;
  if (spec.plain_tso) cfg.use_plain_rules();
  cfg.rng_seed = seed;
  cfg.solver = spec.solver;
  return cfg;
}

inline ResultRow make_row(std::uint64_t seed, double demand, Policy policy, const EvalRecord& rec,
                          const OffsetSet& set) {
  ResultRow row;
  row.seed = seed;
  row.demand = demand;
  row.policy = policy;
  row.converged = rec.solve.converged();
  row.feasible = rec.feasible;
  row.per_cell_energy.resize(rec.solve.power.size(), 0.0);
  for (std::size_t i = 0; i < rec.solve.power.size(); ++i)
    if (rec.solve.load[i] > 0.0)
      row.per_cell_energy[i] = row.converged ? rec.solve.load[i] * rec.solve.power[i] : kInfiniteObjective;
  row.total_energy = row.converged ? energy(rec.solve) : kInfiniteObjective;
  if (rec.lpn_enabled) row.offsets_db = offsets_db(rec.offsets, set);
  return row;
}

// Rows of one (seed, demand) job in policy order.
inline std::vector<ResultRow> run_job(const ExperimentSpec& spec, const Scenario& base, std::uint64_t seed,
                                      double demand) {
  using clock = std::chrono::steady_clock;
  const auto s = with_uniform_demand(base, demand);
  const auto m = s.num_lpns();
  Evaluator ev{s, spec.offset_set, spec.solver};
  std::vector<ResultRow> rows;
  for (auto policy : spec.policies) {
    const auto t0 = clock::now();
    ResultRow row;
    switch (policy) {
      case Policy::ZO: row = make_row(seed, demand, policy, ev.evaluate(all_zero(m, spec.offset_set)), spec.offset_set); break;
      case Policy::MO: row = make_row(seed, demand, policy, ev.evaluate(all_max(m, spec.offset_set)), spec.offset_set); break;
      case Policy::NL:
        row = make_row(seed, demand, policy, ev.evaluate(all_zero(m, spec.offset_set), false), spec.offset_set);
        break;
      case Policy::OO: {
        const auto r = optimize(s, tso_config_for(spec, m, seed));
        row = make_row(seed, demand, policy, r.best_record, spec.offset_set);
        row.tso_iterations = r.trace.size();
        break;
      }
    }
    row.wall_time = spec.record_timing ? std::chrono::duration<double>(clock::now() - t0).count() : 0.0;
    rows.push_back(std::move(row));
  }
  return rows;
}

// Every seed x demand x policy combination. Jobs are independent; with more
// than one worker they run concurrently, and rows are always returned sorted
// by (seed, demand, policy order), so output does not depend on scheduling.
inline ResultTable run_sweep(const ExperimentSpec& spec) {
  validate(spec);
  struct Job {
    std::size_t seed_index;
    std::size_t demand_index;
  };
  std::vector<Scenario> bases;
  for (std::size_t k = 0; k < spec.num_seeds; ++k) {
    if (spec.fixed_scenario) {
      bases.push_back(*spec.fixed_scenario);
    } else {
      auto cfg = spec.scenario;
      cfg.rng_seed = seed_for(spec, k);
      bases.push_back(generate_scenario(cfg));
    }
  }
  std::vector<Job> jobs;
  for (std::size_t k = 0; k < spec.num_seeds; ++k)
    for (std::size_t d = 0; d < spec.demands.size(); ++d) jobs.push_back({k, d});

  std::vector<std::vector<ResultRow>> results(jobs.size());
  std::mutex next_mutex;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t q;
      {
        std::lock_guard lock(next_mutex);
        if (next >= jobs.size()) return;
        q = next++;
      }
      const auto& job = jobs[q];
      results[q] = run_job(spec, bases[job.seed_index], seed_for(spec, job.seed_index), spec.demands[job.demand_index]);
    }
  };
  const auto workers = std::max<std::size_t>(1, std::min(spec.workers, jobs.size()));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  ResultTable table;
  for (auto& rows : results)
    for (auto& row : rows) table.push_back(std::move(row));
  return table;
}

// ---------------------------------------------------------------------------
// Summary

struct PolicyMean {
  double mean_energy{0.0};  // over feasible seeds
  std::size_t feasible_seeds{0};
};

struct Improvement {
  Policy policy;    // A
  Policy baseline;  // B
  std::map<double, double> per_demand;           // mean of (E_B - E_A) / E_B over seeds where both are feasible
  std::map<std::uint64_t, double> per_seed;      // same, averaged over demands
  double mean{0.0};                              // over every (seed, demand) pair where both are feasible
  std::size_t pairs{0};
};

struct Summary {
  std::size_t num_seeds{0};
  std::map<double, std::map<Policy, PolicyMean>> by_demand;
  std::vector<Improvement> improvements;
};

inline double relative_improvement(double energy_a, double energy_b) { return (energy_b - energy_a) / energy_b; }

inline Summary summarize(const ResultTable& table) {
  Summary sum;
  std::map<std::tuple<std::uint64_t, double, Policy>, const ResultRow*> index;
  std::vector<std::uint64_t> seeds;
  std::vector<Policy> present;
  for (const auto& row : table) {
    index[{row.seed, row.demand, row.policy}] = &row;
    if (std::find(seeds.begin(), seeds.end(), row.seed) == seeds.end()) seeds.push_back(row.seed);
    if (std::find(present.begin(), present.end(), row.policy) == present.end()) present.push_back(row.policy);
    auto& pm = sum.by_demand[row.demand][row.policy];
    if (row.feasible) {
      pm.mean_energy += row.total_energy;
      ++pm.feasible_seeds;
    }
  }
  sum.num_seeds = seeds.size();
  for (auto& [d, per_policy] : sum.by_demand)
    for (auto& [p, pm] : per_policy)
      if (pm.feasible_seeds > 0) pm.mean_energy /= static_cast<double>(pm.feasible_seeds);

  std::sort(present.begin(), present.end());
  for (auto a : present) {
    for (auto b : present) {
      if (a == b) continue;
      Improvement imp{a, b, {}, {}, 0.0, 0};
      std::map<double, std::pair<double, std::size_t>> by_d;
      std::map<std::uint64_t, std::pair<double, std::size_t>> by_s;
      double total = 0.0;
      for (const auto& [key, row_a] : index) {
        const auto& [seed, demand, policy] = key;
        if (policy != a || !row_a->feasible) continue;
        const auto it = index.find({seed, demand, b});
        if (it == index.end() || !it->second->feasible) continue;
        const double r = relative_improvement(row_a->total_energy, it->second->total_energy);
        by_d[demand].first += r;
        ++by_d[demand].second;
        by_s[seed].first += r;
        ++by_s[seed].second;
        total += r;
        ++imp.pairs;
      }
      for (auto& [d, acc] : by_d) imp.per_demand[d] = acc.first / static_cast<double>(acc.second);
      for (auto& [s, acc] : by_s) imp.per_seed[s] = acc.first / static_cast<double>(acc.second);
      imp.mean = imp.pairs ? total / static_cast<double>(imp.pairs) : 0.0;
      sum.improvements.push_back(std::move(imp));
    }
  }
  return sum;
}

inline const Improvement* find_improvement(const Summary& s, Policy a, Policy b) {
  for (const auto& imp : s.improvements)
    if (imp.policy == a && imp.baseline == b) return &imp;
  return nullptr;
}

inline json summary_to_json(const Summary& s) {
  json by_demand = json::array();
  for (const auto& [d, per_policy] : s.by_demand) {
    json policies = json::object();
    for (const auto& [p, pm] : per_policy)
      policies[to_string(p)] = {{"mean_energy", pm.feasible_seeds ? json(pm.mean_energy) : json(nullptr)},
                                {"feasible_seeds", pm.feasible_seeds}};
    by_demand.push_back({{"demand_bps", d}, {"policies", policies}});
  }
  json imps = json::array();
  for (const auto& imp : s.improvements) {
    json per_demand = json::array();
    for (const auto& [d, v] : imp.per_demand) per_demand.push_back({{"demand_bps", d}, {"improvement", v}});
    json per_seed = json::array();
    for (const auto& [seed, v] : imp.per_seed) per_seed.push_back({{"seed", seed}, {"improvement", v}});
    imps.push_back({{"policy", to_string(imp.policy)},
                    {"baseline", to_string(imp.baseline)},
                    {"mean", imp.mean},
                    {"pairs", imp.pairs},
                    {"per_demand", per_demand},
                    {"per_seed", per_seed}});
  }
  return {{"num_seeds", s.num_seeds}, {"by_demand", by_demand}, {"improvements", imps}};
}

// ---------------------------------------------------------------------------
// Export

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// results.csv columns:
//   seed,demand_bps,policy,converged,feasible,total_energy_mw,tso_iterations[,wall_time_s]
inline std::string results_csv(const ResultTable& table, bool with_timing = false) {
  std::string out = "seed,demand_bps,policy,converged,feasible,total_energy_mw,tso_iterations";
  if (with_timing) out += ",wall_time_s";
  out += '\n';
  for (const auto& r : table) {
    out += std::to_string(r.seed) + ',' + format_number(r.demand) + ',' + to_string(r.policy) + ',' +
           (r.converged ? "1" : "0") + ',' + (r.feasible ? "1" : "0") + ',' + format_number(r.total_energy) + ',' +
           std::to_string(r.tso_iterations);
    if (with_timing) out += ',' + format_number(r.wall_time);
    out += '\n';
  }
  return out;
}

// per_cell.csv columns: seed,demand_bps,policy,cell_0,...,cell_{n-1}
inline std::string per_cell_csv(const ResultTable& table) {
  std::string out = "seed,demand_bps,policy";
  const std::size_t n = table.empty() ? 0 : table.front().per_cell_energy.size();
  for (std::size_t i = 0; i < n; ++i) out += ",cell_" + std::to_string(i);
  out += '\n';
  for (const auto& r : table) {
    out += std::to_string(r.seed) + ',' + format_number(r.demand) + ',' + to_string(r.policy);
    for (auto e : r.per_cell_energy) out += ',' + format_number(e);
    out += '\n';
  }
  return out;
}

inline json results_to_json(const ResultTable& table, bool with_timing = false) {
  json arr = json::array();
  for (const auto& r : table) {
    json cells = json::array();
    for (auto e : r.per_cell_energy) cells.push_back(finite_or_null(e));
    json offsets = json::array();
    for (auto db : r.offsets_db) offsets.push_back(db == kMinusInfinityDb ? json("-inf") : json(db));
    json row = {{"seed", r.seed},
                {"demand_bps", r.demand},
                {"policy", to_string(r.policy)},
                {"total_energy_mw", finite_or_null(r.total_energy)},
                {"per_cell_energy_mw", cells},
                {"converged", r.converged},
                {"feasible", r.feasible},
                {"tso_iterations", r.tso_iterations},
                {"offsets_db", offsets}};
    if (with_timing) row["wall_time_s"] = r.wall_time;
    arr.push_back(std::move(row));
  }
  return arr;
}

inline ResultTable results_from_json(const json& arr) {
  ResultTable table;
  for (const auto& j : arr) {
    ResultRow r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.demand = j.at("demand_bps").get<double>();
    r.policy = policy_from_string(j.at("policy").get<std::string>());
    r.total_energy = number_or_inf(j.at("total_energy_mw"));
    for (const auto& e : j.at("per_cell_energy_mw")) r.per_cell_energy.push_back(number_or_inf(e));
    r.converged = j.at("converged").get<bool>();
    r.feasible = j.at("feasible").get<bool>();
    r.tso_iterations = j.at("tso_iterations").get<std::size_t>();
    for (const auto& v : j.at("offsets_db")) r.offsets_db.push_back(offset_db_from_json(v));
    if (j.contains("wall_time_s")) r.wall_time = j.at("wall_time_s").get<double>();
    table.push_back(std::move(r));
  }
  return table;
}

// Experiment file: every key optional.
//   { "scenario": {ScenarioConfig keys}, "scenario_file": path,
//     "demands_bps": [...], "policies": ["OO","ZO","MO","NL"], "num_seeds": 10,
//     "offsets_db": [0,...,10], "alpha": 140, "beta": 4, "init": "zero"|"random",
//     "plain_tso": false,
//     "solver": {"tolerance", "divergence_power", "max_sweeps"},
//     "workers": 1, "record_timing": false }
inline ExperimentSpec experiment_spec_from_json(const json& j) {
  static const char* known[] = {"scenario", "scenario_file", "demands_bps", "policies", "num_seeds", "offsets_db",
                                "alpha", "beta", "init", "plain_tso", "solver", "workers", "record_timing"};
  for (const auto& [key, _] : j.items())
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw std::invalid_argument("experiment: unknown key '" + key + "'");
  ExperimentSpec spec;
  if (j.contains("scenario")) spec.scenario = scenario_config_from_json(j.at("scenario"));
  if (j.contains("scenario_file")) spec.fixed_scenario = scenario_from_json(read_json_file(j.at("scenario_file")));
  if (j.contains("demands_bps")) spec.demands = j.at("demands_bps").get<std::vector<double>>();
  if (j.contains("policies")) {
    spec.policies.clear();
    for (const auto& p : j.at("policies")) spec.policies.push_back(policy_from_string(p.get<std::string>()));
  }
  if (j.contains("num_seeds")) spec.num_seeds = j.at("num_seeds").get<std::size_t>();
  if (j.contains("offsets_db")) spec.offset_set = offset_set_from_json(j.at("offsets_db"));
  if (j.contains("alpha")) spec.alpha = j.at("alpha").get<std::size_t>();
  if (j.contains("beta")) spec.beta = j.at("beta").get<std::size_t>();
  if (j.contains("init")) {
    const auto init = j.at("init").get<std::string>();
    if (init == "zero")
      spec.init = TsoInit::ZeroOffset;
    else if (init == "random")
      spec.init = TsoInit::Random;
    else
      throw std::invalid_argument("experiment: init must be 'zero' or 'random'");
  }
  if (j.contains("plain_tso")) spec.plain_tso = j.at("plain_tso").get<bool>();
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("tolerance")) spec.solver.tolerance = s.at("tolerance").get<double>();
    if (s.contains("divergence_power")) spec.solver.divergence_power = s.at("divergence_power").get<double>();
    if (s.contains("max_sweeps")) spec.solver.max_sweeps = s.at("max_sweeps").get<std::size_t>();
  }
  if (j.contains("workers")) spec.workers = j.at("workers").get<std::size_t>();
  if (j.contains("record_timing")) spec.record_timing = j.at("record_timing").get<bool>();
  validate(spec);
  return spec;
}

}  // namespace hetnet
