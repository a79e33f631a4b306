#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "association.hpp"
#include "generate.hpp"
#include "load_coupling.hpp"
#include "scenario.hpp"
#include "tso.hpp"

namespace hetnet {

using json = nlohmann::json;

inline constexpr const char* kScenarioFormat = "hetnet-scenario/1";

// Non-finite numbers have no JSON form; they are written as null.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_or_inf(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline std::string to_string(CellKind k) { return k == CellKind::Macro ? "macro" : "lpn"; }

inline CellKind cell_kind_from_string(const std::string& s) {
  if (s == "macro") return CellKind::Macro;
  if (s == "lpn") return CellKind::Lpn;
  throw std::invalid_argument("unknown cell kind '" + s + "'");
}

// Scenario schema:
//   { "format": "hetnet-scenario/1",
//     "noise_power": mW, "num_resource_units": M, "resource_bandwidth": Hz,
//     "cells": [{"id","kind":"macro"|"lpn","x","y","antenna_height","power_limit","pilot_power"}],
//     "ues":   [{"id","x","y","demand"}],
//     "gain":  {"rows": n, "cols": |J|, "data": [row-major, cell-major]} }
inline json scenario_to_json(const Scenario& s) {
  json cells = json::array();
  for (const auto& c : s.cells)
    cells.push_back({{"id", c.id},
                     {"kind", to_string(c.kind)},
                     {"x", c.position.x},
                     {"y", c.position.y},
                     {"antenna_height", c.antenna_height},
                     {"power_limit", c.power_limit},
                     {"pilot_power", c.pilot_power}});
  json ues = json::array();
  for (const auto& u : s.ues) ues.push_back({{"id", u.id}, {"x", u.position.x}, {"y", u.position.y}, {"demand", u.demand}});
  return {{"format", kScenarioFormat},
          {"noise_power", s.noise_power},
          {"num_resource_units", s.num_resource_units},
          {"resource_bandwidth", s.resource_bandwidth},
          {"cells", cells},
          {"ues", ues},
          {"gain", {{"rows", s.gain.rows()}, {"cols", s.gain.cols()}, {"data", s.gain.data()}}}};
}

inline Scenario scenario_from_json(const json& j) {
  if (j.contains("format") && j.at("format") != kScenarioFormat)
    throw std::invalid_argument("unsupported scenario format " + j.at("format").dump());
  Scenario s;
  s.noise_power = j.at("noise_power").get<double>();
  s.num_resource_units = j.at("num_resource_units").get<std::size_t>();
  s.resource_bandwidth = j.at("resource_bandwidth").get<double>();
  for (const auto& c : j.at("cells"))
    s.cells.push_back(Cell{c.at("id").get<std::size_t>(), cell_kind_from_string(c.at("kind").get<std::string>()),
                           Point{c.at("x").get<double>(), c.at("y").get<double>()},
                           c.at("antenna_height").get<double>(), c.at("power_limit").get<double>(),
                           c.at("pilot_power").get<double>()});
  for (const auto& u : j.at("ues"))
    s.ues.push_back(UserEquipment{u.at("id").get<std::size_t>(), Point{u.at("x").get<double>(), u.at("y").get<double>()},
                                  u.at("demand").get<double>()});
  const auto& g = j.at("gain");
  s.gain = GainMatrix(g.at("rows").get<std::size_t>(), g.at("cols").get<std::size_t>(),
                      g.at("data").get<std::vector<double>>());
  validate(s);
  return s;
}

// Every field is optional; missing keys keep the defaults.
inline ScenarioConfig scenario_config_from_json(const json& j) {
  ScenarioConfig c;
  auto opt = [&j](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  opt("num_macro_sites", c.num_macro_sites);
  opt("lpns_per_site", c.lpns_per_site);
  opt("ues_per_site", c.ues_per_site);
  opt("inter_site_distance", c.inter_site_distance);
  opt("carrier_frequency", c.carrier_frequency);
  opt("shadowing_stddev", c.shadowing_stddev);
  opt("macro_power_limit", c.macro_power_limit);
  opt("lpn_power_limit", c.lpn_power_limit);
  opt("demand", c.demand);
  opt("rng_seed", c.rng_seed);
  opt("macro_height", c.macro_height);
  opt("lpn_height", c.lpn_height);
  opt("ue_height", c.ue_height);
  opt("noise_psd", c.noise_psd);
  opt("resource_bandwidth", c.resource_bandwidth);
  opt("cell_bandwidth", c.cell_bandwidth);
  for (const auto& [key, _] : j.items()) {
    static const char* known[] = {"num_macro_sites", "lpns_per_site", "ues_per_site", "inter_site_distance",
                                  "carrier_frequency", "shadowing_stddev", "macro_power_limit", "lpn_power_limit",
                                  "demand", "rng_seed", "macro_height", "lpn_height", "ue_height", "noise_psd",
                                  "resource_bandwidth", "cell_bandwidth"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw std::invalid_argument("scenario config: unknown key '" + key + "'");
  }
  validate(c);
  return c;
}

inline json scenario_config_to_json(const ScenarioConfig& c) {
  return {{"num_macro_sites", c.num_macro_sites},
          {"lpns_per_site", c.lpns_per_site},
          {"ues_per_site", c.ues_per_site},
          {"inter_site_distance", c.inter_site_distance},
          {"carrier_frequency", c.carrier_frequency},
          {"shadowing_stddev", c.shadowing_stddev},
          {"macro_power_limit", c.macro_power_limit},
          {"lpn_power_limit", c.lpn_power_limit},
          {"demand", c.demand},
          {"rng_seed", c.rng_seed},
          {"macro_height", c.macro_height},
          {"lpn_height", c.lpn_height},
          {"ue_height", c.ue_height},
          {"noise_psd", c.noise_psd},
          {"resource_bandwidth", c.resource_bandwidth},
          {"cell_bandwidth", c.cell_bandwidth}};
}

// An offset vector is written as its dB values; -inf is the string "-inf".
inline json offsets_to_json(const OffsetVector& x, const OffsetSet& set) {
  json arr = json::array();
  for (auto db : offsets_db(x, set)) arr.push_back(db == kMinusInfinityDb ? json("-inf") : json(db));
  return arr;
}

inline double offset_db_from_json(const json& v) {
  if (!v.is_string()) return v.get<double>();
  if (v.get<std::string>() != "-inf") throw std::invalid_argument("bad offset value " + v.dump());
  return kMinusInfinityDb;
}

inline OffsetVector offsets_from_json(const json& j, const OffsetSet& set) {
  OffsetVector x;
  for (const auto& v : j) {
    const double db = offset_db_from_json(v);
    const auto it = std::find(set.begin(), set.end(), db);
    if (it == set.end()) throw std::invalid_argument("offset " + v.dump() + " dB is not in the offset set");
    x.levels.push_back(static_cast<std::size_t>(it - set.begin()));
  }
  return x;
}

inline json offset_set_to_json(const OffsetSet& set) {
  json arr = json::array();
  for (auto db : set) arr.push_back(db == kMinusInfinityDb ? json("-inf") : json(db));
  return arr;
}

inline OffsetSet offset_set_from_json(const json& j) {
  OffsetSet set;
  for (const auto& v : j) set.push_back(offset_db_from_json(v));
  validate(set);
  return set;
}

inline json solve_result_to_json(const SolveResult& r) {
  json power = json::array();
  for (auto p : r.power) power.push_back(finite_or_null(p));
  return {{"status", r.converged() ? "converged" : "diverged"},
          {"feasible", r.feasible},
          {"outer_iterations", r.outer_iterations},
          {"residual", finite_or_null(r.residual)},
          {"power", power},
          {"load", r.load},
          {"energy", r.converged() ? json(energy(r)) : json(nullptr)}};
}

inline json eval_record_to_json(const EvalRecord& rec, const OffsetSet& set) {
  return {{"offsets_db", rec.lpn_enabled ? offsets_to_json(rec.offsets, set) : json(nullptr)},
          {"lpn_enabled", rec.lpn_enabled},
          {"serving", rec.association.serving},
          {"objective", finite_or_null(rec.objective)},
          {"feasible", rec.feasible},
          {"solve", solve_result_to_json(rec.solve)}};
}

// One JSON line per iteration.
inline json trace_entry_to_json(const TsoTraceEntry& e) {
  return {{"iteration", e.iteration},
          {"moved_position", e.moved_position},
          {"candidate_energy", finite_or_null(e.candidate_energy)},
          {"best_energy", finite_or_null(e.best_energy)},
          {"k", e.k},
          {"tabu_snapshot", e.tabu_snapshot},
          {"aspiration", e.aspiration}};
}

inline std::string trace_to_jsonl(const std::vector<TsoTraceEntry>& trace) {
  std::string out;
  for (const auto& e : trace) {
    out += trace_entry_to_json(e).dump();
    out += '\n';
  }
  return out;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace hetnet
