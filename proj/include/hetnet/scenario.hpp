#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetnet {

enum class CellKind { Macro, Lpn };

struct Point {
  double x{0.0};
  double y{0.0};
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// A transmitting cell. Powers are mW per resource unit.
struct Cell {
  std::size_t id{0};
  CellKind kind{CellKind::Macro};
  Point position{};
  double antenna_height{30.0};
  double power_limit{200.0};
  double pilot_power{200.0};

  bool is_lpn() const noexcept { return kind == CellKind::Lpn; }
};

struct UserEquipment {
  std::size_t id{0};
  Point position{};
  double demand{0.0};  // bits per second
};

// Row-major cells x UEs matrix of linear power gains.
class GainMatrix {
 public:
  GainMatrix() = default;
  GainMatrix(std::size_t num_cells, std::size_t num_ues, double fill = 0.0)
      : rows_{num_cells}, cols_{num_ues}, data_(num_cells * num_ues, fill) {}
  GainMatrix(std::size_t num_cells, std::size_t num_ues, std::vector<double> data)
      : rows_{num_cells}, cols_{num_ues}, data_{std::move(data)} {
    if (data_.size() != rows_ * cols_)
      throw std::invalid_argument("gain matrix: data size does not match dimensions");
  }

  double operator()(std::size_t cell, std::size_t ue) const noexcept { return data_[cell * cols_ + ue]; }
  double& operator()(std::size_t cell, std::size_t ue) noexcept { return data_[cell * cols_ + ue]; }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const GainMatrix&) const = default;

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

// The immutable problem instance. Cells are ordered macros first, then LPNs.
struct Scenario {
  std::vector<Cell> cells;
  std::vector<UserEquipment> ues;
  GainMatrix gain;
  double noise_power{1.0};  // mW per resource unit
  std::size_t num_resource_units{1};
  double resource_bandwidth{1.0};  // Hz

  std::size_t num_cells() const noexcept { return cells.size(); }
  std::size_t num_ues() const noexcept { return ues.size(); }

  std::size_t num_lpns() const noexcept {
    std::size_t m = 0;
    for (const auto& c : cells) m += c.is_lpn() ? 1 : 0;
    return m;
  }

  // Cell ids of the LPNs in id order; position k holds the cell of offset slot k.
  std::vector<std::size_t> lpn_ids() const {
    std::vector<std::size_t> ids;
    for (const auto& c : cells)
      if (c.is_lpn()) ids.push_back(c.id);
    return ids;
  }

  bool operator==(const Scenario& o) const {
    auto same_cell = [](const Cell& a, const Cell& b) {
      return a.id == b.id && a.kind == b.kind && a.position.x == b.position.x && a.position.y == b.position.y &&
             a.antenna_height == b.antenna_height && a.power_limit == b.power_limit && a.pilot_power == b.pilot_power;
    };
    auto same_ue = [](const UserEquipment& a, const UserEquipment& b) {
      return a.id == b.id && a.position.x == b.position.x && a.position.y == b.position.y && a.demand == b.demand;
    };
    if (cells.size() != o.cells.size() || ues.size() != o.ues.size()) return false;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (!same_cell(cells[i], o.cells[i])) return false;
    for (std::size_t j = 0; j < ues.size(); ++j)
      if (!same_ue(ues[j], o.ues[j])) return false;
    return gain == o.gain && noise_power == o.noise_power && num_resource_units == o.num_resource_units &&
           resource_bandwidth == o.resource_bandwidth;
  }
};

// Throws std::invalid_argument describing the first violated invariant.
inline void validate(const Scenario& s) {
  const auto n = s.cells.size();
  bool seen_lpn = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = s.cells[i];
    if (c.id != i) throw std::invalid_argument("scenario: cell ids must be contiguous 0..n-1");
    if (!(c.power_limit > 0.0)) throw std::invalid_argument("scenario: cell power_limit must be > 0");
    if (!(c.pilot_power > 0.0)) throw std::invalid_argument("scenario: cell pilot_power must be > 0");
    if (!(c.antenna_height > 0.0)) throw std::invalid_argument("scenario: cell antenna_height must be > 0");
    if (c.is_lpn())
      seen_lpn = true;
    else if (seen_lpn)
      throw std::invalid_argument("scenario: macros must precede LPNs");
  }
  for (std::size_t j = 0; j < s.ues.size(); ++j) {
    if (s.ues[j].id != j) throw std::invalid_argument("scenario: UE ids must be contiguous 0..|J|-1");
    if (!(s.ues[j].demand > 0.0)) throw std::invalid_argument("scenario: UE demand must be > 0");
  }
  if (s.gain.rows() != n || s.gain.cols() != s.ues.size())
    throw std::invalid_argument("scenario: gain matrix must be num_cells x num_ues");
  for (std::size_t j = 0; j < s.ues.size(); ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = s.gain(i, j);
      if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("scenario: gains must be finite and >= 0");
      best = std::max(best, g);
    }
    if (!(best > 0.0))
      throw std::invalid_argument("scenario: UE " + std::to_string(j) + " has zero gain to every cell");
  }
  if (!(s.noise_power > 0.0)) throw std::invalid_argument("scenario: noise_power must be > 0");
  if (s.num_resource_units < 1) throw std::invalid_argument("scenario: num_resource_units must be >= 1");
  if (!(s.resource_bandwidth > 0.0)) throw std::invalid_argument("scenario: resource_bandwidth must be > 0");
}

// Copy of `s` with every UE demand replaced by `demand` (bps).
inline Scenario with_uniform_demand(Scenario s, double demand) {
  for (auto& ue : s.ues) ue.demand = demand;
  return s;
}

}  // namespace hetnet
