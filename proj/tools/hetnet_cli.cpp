// hetnet_cli: scenario generation, single-policy solves, demand sweeps and
// the graph reduction demo.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetnet/hetnet.hpp"

namespace fs = std::filesystem;
using namespace hetnet;

namespace {

struct SolverFlags {
  std::optional<double> tolerance;
  std::optional<double> divergence_power;
  std::optional<std::size_t> max_sweeps;

  void add_to(CLI::App* app) {
    app->add_option("--tolerance", tolerance, "Sweep convergence tolerance (relative power change)");
    app->add_option("--divergence-power", divergence_power, "Power (mW) above which a solve is declared diverged");
    app->add_option("--max-sweeps", max_sweeps, "Gauss-Seidel sweep cap");
  }

  void apply(SolverOptions& o) const {
    if (tolerance) o.tolerance = *tolerance;
    if (divergence_power) o.divergence_power = *divergence_power;
    if (max_sweeps) o.max_sweeps = *max_sweeps;
  }
};

ScenarioConfig load_config(const std::string& path) {
  return path.empty() ? ScenarioConfig{} : scenario_config_from_json(read_json_file(path));
}

void write_json(const std::string& path, const json& j) {
  if (path.empty() || path == "-")
    std::cout << j.dump(2) << '\n';
  else
    write_text_file(path, j.dump(2) + "\n");
}

int run_generate(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<double> demand,
                 const std::string& out) {
  auto cfg = load_config(config_path);
  if (seed) cfg.rng_seed = *seed;
  if (demand) cfg.demand = *demand;
  const auto s = generate_scenario(cfg);
  write_json(out, scenario_to_json(s));
  std::cerr << "generated " << s.num_cells() << " cells (" << s.num_lpns() << " LPNs), " << s.num_ues()
            << " UEs, M = " << s.num_resource_units << '\n';
  return 0;
}

struct SolveArgs {
  std::string scenario_path;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> demand;
  std::string policy{"OO"};
  std::string offsets_path;
  std::optional<std::size_t> alpha;
  std::optional<std::size_t> beta;
  std::uint64_t tso_seed{1};
  std::string init{"zero"};
  bool plain{false};
  std::string out;
  std::string trace_path;
  SolverFlags solver;
};

int run_solve(const SolveArgs& a) {
  Scenario s;
  if (!a.scenario_path.empty()) {
    s = scenario_from_json(read_json_file(a.scenario_path));
  } else {
    auto cfg = load_config(a.config_path);
    if (a.seed) cfg.rng_seed = *a.seed;
    s = generate_scenario(cfg);
  }
  if (a.demand) s = with_uniform_demand(std::move(s), *a.demand);

  auto cfg = TsoConfig::for_lpn_count(s.num_lpns());
  if (a.alpha) cfg.alpha = *a.alpha;
  if (a.beta) cfg.beta = *a.beta;
  cfg.rng_seed = a.tso_seed;
  cfg.init = a.init == "random" ? TsoInit::Random : TsoInit::ZeroOffset;
  if (a.plain) cfg.use_plain_rules();
  a.solver.apply(cfg.solver);

  Evaluator ev{s, cfg.offset_set, cfg.solver};
  json out;
  EvalRecord rec;
  if (!a.offsets_path.empty()) {
    rec = ev.evaluate(offsets_from_json(read_json_file(a.offsets_path), cfg.offset_set));
    out["policy"] = "custom";
  } else {
    const auto policy = policy_from_string(a.policy);
    out["policy"] = to_string(policy);
    const auto m = s.num_lpns();
    switch (policy) {
      case Policy::ZO: rec = ev.evaluate(all_zero(m, cfg.offset_set)); break;
      case Policy::MO: rec = ev.evaluate(all_max(m, cfg.offset_set)); break;
      case Policy::NL: rec = ev.evaluate(all_zero(m, cfg.offset_set), false); break;
      case Policy::OO: {
        const auto r = optimize(s, cfg);
        rec = r.best_record;
        out["tso"] = {{"outcome", r.outcome == TsoOutcome::Feasible ? "feasible" : "no_feasible_solution"},
                      {"iterations", r.trace.size()},
                      {"solves", r.solves},
                      {"alpha", cfg.alpha},
                      {"beta", cfg.beta}};
        if (!a.trace_path.empty()) write_text_file(a.trace_path, trace_to_jsonl(r.trace));
        break;
      }
    }
  }
  out["result"] = eval_record_to_json(rec, cfg.offset_set);
  out["total_bandwidth_power_mw"] =
      finite_or_null(rec.solve.converged() ? energy(rec.solve) * static_cast<double>(s.num_resource_units)
                                           : kInfiniteObjective);
  write_json(a.out, out);
  return rec.feasible ? 0 : 2;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

struct SweepArgs {
  std::string config_path;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> base_seed;
  std::string demands;
  std::string policies;
  std::optional<std::size_t> workers;
  bool timing{false};
  bool plain{false};
  std::string out_dir{"results"};
  SolverFlags solver;
};

int run_sweep_cmd(const SweepArgs& a) {
  ExperimentSpec spec = a.config_path.empty() ? ExperimentSpec{} : experiment_spec_from_json(read_json_file(a.config_path));
  if (a.seeds) spec.num_seeds = *a.seeds;
  if (a.base_seed) spec.scenario.rng_seed = *a.base_seed;
  if (!a.demands.empty()) spec.demands = parse_number_list(a.demands);
  if (!a.policies.empty()) {
    spec.policies.clear();
    std::istringstream in(a.policies);
    std::string p;
    while (std::getline(in, p, ','))
      if (!p.empty()) spec.policies.push_back(policy_from_string(p));
  }
  if (a.workers) spec.workers = *a.workers;
  if (a.timing) spec.record_timing = true;
  if (a.plain) spec.plain_tso = true;
  a.solver.apply(spec.solver);

  const auto table = run_sweep(spec);
  const auto summary = summarize(table);
  fs::create_directories(a.out_dir);
  const auto dir = fs::path(a.out_dir);
  write_text_file((dir / "results.csv").string(), results_csv(table, spec.record_timing));
  write_text_file((dir / "per_cell.csv").string(), per_cell_csv(table));
  write_text_file((dir / "results.json").string(), results_to_json(table, spec.record_timing).dump(1) + "\n");
  write_text_file((dir / "summary.json").string(), summary_to_json(summary).dump(2) + "\n");

  std::cout << "rows: " << table.size() << ", seeds: " << summary.num_seeds << '\n';
  for (const auto& [d, per_policy] : summary.by_demand) {
    std::printf("%8.0f bps", d);
    for (const auto& [p, pm] : per_policy)
      std::printf("  %s=%s (%zu/%zu)", to_string(p).c_str(),
                  pm.feasible_seeds ? format_number(pm.mean_energy).substr(0, 10).c_str() : "infeasible",
                  pm.feasible_seeds, summary.num_seeds);
    std::printf("\n");
  }
  if (const auto* imp = find_improvement(summary, Policy::OO, Policy::ZO))
    std::printf("OO vs ZO: mean improvement %.2f%% over %zu feasible pairs\n", 100.0 * imp->mean, imp->pairs);
  return 0;
}

struct ReduceArgs {
  std::string graph_path;
  std::size_t nodes{0};
  double epsilon{1e-4};
  bool tso{false};
  bool plain{false};
  std::uint64_t tso_seed{1};
  std::string out_dir{"reduction"};
};

int run_reduce(const ReduceArgs& a) {
  std::ifstream in(a.graph_path);
  if (!in) throw std::runtime_error("cannot open " + a.graph_path);
  const auto graph = read_edge_list(in, a.nodes);
  const auto gadget = build_gadget(graph, a.epsilon);
  const auto mis = mis_bruteforce(graph);
  const auto best = exhaustive_offset_search(gadget);

  json report;
  report["nodes"] = graph.num_nodes;
  report["edges"] = graph.edges.size();
  report["epsilon"] = a.epsilon;
  report["mis"] = {{"size", mis.size}, {"nodes", mis.nodes}};
  report["exhaustive"] = {{"found", best.found},
                          {"active_lpns", best.active},
                          {"energy", finite_or_null(best.energy)},
                          {"independent", is_independent_set(graph, best.active)},
                          {"patterns", best.patterns}};
  json bounds = json::array();
  bool all_hold = true;
  for (std::size_t k = 0; k < graph.num_nodes; ++k) {
    const auto b = verify_bounds(gadget, k);
    all_hold = all_hold && b.holds;
    bounds.push_back({{"k", k}, {"lower_k", b.lower_k}, {"upper_k_plus_1", b.upper_k_plus_1}, {"holds", b.holds}});
  }
  report["bounds"] = bounds;
  report["bounds_hold"] = all_hold;
  report["reduction_consistent"] =
      best.found && best.active.size() == mis.size && is_independent_set(graph, best.active);
  if (a.tso) {
    auto cfg = gadget_tso_config(gadget, a.tso_seed);
    if (a.plain) cfg.use_plain_rules();
    const auto r = optimize(gadget.scenario, cfg);
    report["tso"] = {{"feasible", r.outcome == TsoOutcome::Feasible},
                     {"active_lpns", active_lpns(r.best)},
                     {"energy", finite_or_null(r.best_energy)},
                     {"iterations", r.trace.size()}};
  }

  fs::create_directories(a.out_dir);
  const auto dir = fs::path(a.out_dir);
  write_text_file((dir / "gadget.json").string(), scenario_to_json(gadget.scenario).dump(1) + "\n");
  write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
  std::cout << "MIS size " << mis.size << ", exhaustive optimum activates " << best.active.size()
            << " LPNs, bounds " << (all_hold ? "hold" : "FAIL") << '\n';
  return report["reduction_consistent"].get<bool>() && all_hold ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy minimisation by LPN range offsets in load-coupled HetNets"};
  app.require_subcommand(1);

  std::string gen_config, gen_out = "-";
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> gen_demand;
  auto* gen = app.add_subcommand("generate", "Generate a scenario file from a config");
  gen->add_option("--config", gen_config, "ScenarioConfig JSON file");
  gen->add_option("--seed", gen_seed, "Override rng_seed");
  gen->add_option("--demand", gen_demand, "Override per-UE demand (bps)");
  gen->add_option("-o,--out", gen_out, "Output scenario JSON ('-' for stdout)");

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "Evaluate one policy on one scenario");
  auto* src = solve->add_option_group("source");
  src->add_option("--scenario", sa.scenario_path, "Scenario JSON file");
  src->add_option("--config", sa.config_path, "ScenarioConfig JSON file (generated on the fly)");
  solve->add_option("--seed", sa.seed, "Override rng_seed when generating");
  solve->add_option("--demand", sa.demand, "Override every UE demand (bps)");
  solve->add_option("--policy", sa.policy, "OO, ZO, MO or NL")->check(CLI::IsMember({"OO", "ZO", "MO", "NL"}));
  solve->add_option("--offsets", sa.offsets_path, "Evaluate an explicit offset vector (JSON array of dB)");
  solve->add_option("--alpha", sa.alpha, "Tabu patience (default 10 m)");
  solve->add_option("--beta", sa.beta, "Tabu tenure (default ceil(sqrt m))");
  solve->add_option("--tso-seed", sa.tso_seed, "Seed for tie-breaking and random init");
  solve->add_option("--init", sa.init, "zero or random")->check(CLI::IsMember({"zero", "random"}));
  solve->add_flag("--plain-tso", sa.plain, "Plain tabu rules: objective-only ranking, one-level moves, tenure beta - 1");
  solve->add_option("-o,--out", sa.out, "Output JSON ('-' or empty for stdout)");
  solve->add_option("--trace", sa.trace_path, "Write the tabu trace as JSON lines");
  sa.solver.add_to(solve);

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Run a seeded demand sweep over policies");
  sweep->add_option("--config", wa.config_path, "Experiment JSON file");
  sweep->add_option("--seeds", wa.seeds, "Number of seeds");
  sweep->add_option("--seed", wa.base_seed, "First scenario seed");
  sweep->add_option("--demands", wa.demands, "Comma-separated demands in bps");
  sweep->add_option("--policies", wa.policies, "Comma-separated subset of OO,ZO,MO,NL");
  sweep->add_option("--workers", wa.workers, "Concurrent jobs");
  sweep->add_flag("--timing", wa.timing, "Record wall time per row (output no longer byte-reproducible)");
  sweep->add_flag("--plain-tso", wa.plain, "Plain tabu rules (see solve --help)");
  sweep->add_option("-o,--out-dir", wa.out_dir, "Output directory");
  wa.solver.add_to(sweep);

  ReduceArgs ra;
  auto* reduce = app.add_subcommand("reduce", "Build the independent-set gadget from a graph and check it");
  reduce->add_option("--graph", ra.graph_path, "Edge list, one 'u v' pair per line (0-indexed)")->required();
  reduce->add_option("--nodes", ra.nodes, "Node count when isolated nodes are not listed");
  reduce->add_option("--epsilon", ra.epsilon, "Cross gain epsilon");
  reduce->add_flag("--tso", ra.tso, "Also run the tabu search on the gadget");
  reduce->add_option("--tso-seed", ra.tso_seed, "Tabu search seed");
  reduce->add_flag("--plain-tso", ra.plain, "Plain tabu rules (see solve --help)");
  reduce->add_option("-o,--out-dir", ra.out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*gen) return run_generate(gen_config, gen_seed, gen_demand, gen_out);
    if (*solve) return run_solve(sa);
    if (*sweep) return run_sweep_cmd(wa);
    if (*reduce) return run_reduce(ra);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
