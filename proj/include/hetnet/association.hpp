#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace hetnet {

inline constexpr double kMinusInfinityDb = -std::numeric_limits<double>::infinity();

// Scores closer than this (dB) count as ties; ties go to the lowest cell id.
inline constexpr double kAssociationTieDb = 1e-9;

// Ordered candidate offsets in dB. May contain -inf, which switches an LPN off.
using OffsetSet = std::vector<double>;

inline OffsetSet default_offset_set() {
  OffsetSet s;
  for (int db = 0; db <= 10; ++db) s.push_back(db);
  return s;
}

inline void validate(const OffsetSet& set) {
  if (set.empty()) throw std::invalid_argument("offset set must not be empty");
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (std::isnan(set[k]) || set[k] == std::numeric_limits<double>::infinity())
      throw std::invalid_argument("offset set entries must be finite dB values or -inf");
    if (k > 0 && !(set[k] > set[k - 1])) throw std::invalid_argument("offset set must be strictly ascending");
  }
}

// One level index into the offset set per LPN, in LPN id order.
struct OffsetVector {
  std::vector<std::size_t> levels;

  std::size_t size() const noexcept { return levels.size(); }
  auto operator<=>(const OffsetVector&) const = default;
};

inline void validate(const OffsetVector& x, const OffsetSet& set, std::size_t num_lpns) {
  if (x.size() != num_lpns)
    throw std::invalid_argument("offset vector has " + std::to_string(x.size()) + " entries, expected " +
                                std::to_string(num_lpns));
  for (auto level : x.levels)
    if (level >= set.size()) throw std::invalid_argument("offset level out of range");
}

// Every LPN at the 0 dB level when the set contains one, otherwise at the lowest level.
inline OffsetVector all_zero(std::size_t num_lpns, const OffsetSet& set = default_offset_set()) {
  std::size_t level = 0;
  for (std::size_t k = 0; k < set.size(); ++k)
    if (set[k] == 0.0) level = k;
  return OffsetVector{std::vector<std::size_t>(num_lpns, level)};
}

inline OffsetVector all_max(std::size_t num_lpns, const OffsetSet& set = default_offset_set()) {
  return OffsetVector{std::vector<std::size_t>(num_lpns, set.empty() ? 0 : set.size() - 1)};
}

inline std::vector<double> offsets_db(const OffsetVector& x, const OffsetSet& set) {
  std::vector<double> out;
  out.reserve(x.size());
  for (auto level : x.levels) out.push_back(set.at(level));
  return out;
}

// UE -> serving cell map.
struct Association {
  std::vector<std::size_t> serving;

  // UEs of each cell, ascending UE id.
  std::vector<std::vector<std::size_t>> served_sets(std::size_t num_cells) const {
    std::vector<std::vector<std::size_t>> sets(num_cells);
    for (std::size_t j = 0; j < serving.size(); ++j) sets[serving[j]].push_back(j);
    return sets;
  }

  auto operator<=>(const Association&) const = default;
};

// Received pilot power in dB for every (cell, UE) pair; -inf where the gain
// is zero. Association only ever reads this table.
class PilotTable {
 public:
  explicit PilotTable(const Scenario& s)
      : num_cells_{s.num_cells()}, num_ues_{s.num_ues()}, lpns_{s.lpn_ids()}, db_(num_cells_ * num_ues_) {
    for (std::size_t i = 0; i < num_cells_; ++i)
      for (std::size_t j = 0; j < num_ues_; ++j) {
        const double g = s.gain(i, j);
        db_[i * num_ues_ + j] = g > 0.0 ? 10.0 * std::log10(s.cells[i].pilot_power * g) : kMinusInfinityDb;
      }
  }

  double operator()(std::size_t cell, std::size_t ue) const noexcept { return db_[cell * num_ues_ + ue]; }
  std::size_t num_cells() const noexcept { return num_cells_; }
  std::size_t num_ues() const noexcept { return num_ues_; }
  const std::vector<std::size_t>& lpn_ids() const noexcept { return lpns_; }

 private:
  std::size_t num_cells_;
  std::size_t num_ues_;
  std::vector<std::size_t> lpns_;
  std::vector<double> db_;
};

// Best received pilot plus offset. LPN k (k-th LPN by id) adds offsets[k] dB;
// macros add nothing. With `lpn_enabled` false only macros are eligible.
// Cells with zero gain or a -inf offset are never eligible.
inline Association associate(const PilotTable& t, const std::vector<double>& lpn_offsets_db, bool lpn_enabled = true) {
  const auto& lpns = t.lpn_ids();
  if (lpn_offsets_db.size() != lpns.size())
    throw std::invalid_argument("associate: expected one offset per LPN");
  std::vector<double> bias(t.num_cells(), 0.0);
  for (std::size_t k = 0; k < lpns.size(); ++k) bias[lpns[k]] = lpn_enabled ? lpn_offsets_db[k] : kMinusInfinityDb;

  Association a;
  a.serving.resize(t.num_ues());
  for (std::size_t j = 0; j < t.num_ues(); ++j) {
    bool found = false;
    double best = 0.0;
    std::size_t best_cell = 0;
    for (std::size_t i = 0; i < t.num_cells(); ++i) {
      const double pilot = t(i, j);
      if (pilot == kMinusInfinityDb || bias[i] == kMinusInfinityDb) continue;
      const double score = pilot + bias[i];
      if (!found || score > best + kAssociationTieDb) {
        found = true;
        best = score;
        best_cell = i;
      }
    }
    if (!found) throw std::runtime_error("associate: UE " + std::to_string(j) + " has no eligible serving cell");
    a.serving[j] = best_cell;
  }
  return a;
}

inline Association associate(const Scenario& s, const std::vector<double>& lpn_offsets_db, bool lpn_enabled = true) {
  return associate(PilotTable{s}, lpn_offsets_db, lpn_enabled);
}

inline Association associate(const PilotTable& t, const OffsetVector& x, const OffsetSet& set,
                             bool lpn_enabled = true) {
  validate(x, set, t.lpn_ids().size());
  return associate(t, offsets_db(x, set), lpn_enabled);
}

inline Association associate(const Scenario& s, const OffsetVector& x, const OffsetSet& set,
                             bool lpn_enabled = true) {
  validate(x, set, s.num_lpns());
  return associate(s, offsets_db(x, set), lpn_enabled);
}

// Macro-only association (all LPNs switched off).
inline Association associate_macros_only(const Scenario& s) {
  return associate(s, std::vector<double>(s.num_lpns(), 0.0), false);
}

}  // namespace hetnet
