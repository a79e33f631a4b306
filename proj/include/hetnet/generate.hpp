#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "propagation.hpp"
#include "random.hpp"
#include "scenario.hpp"

namespace hetnet {

// Knobs for the procedural scenario. Defaults are the 7-site, 21-cell layout.
struct ScenarioConfig {
  std::size_t num_macro_sites{7};
  std::size_t lpns_per_site{2};
  std::size_t ues_per_site{30};
  double inter_site_distance{500.0};  // m
  double carrier_frequency{2000.0};   // MHz
  double shadowing_stddev{8.0};       // dB
  double macro_power_limit{200.0};    // mW per RU
  double lpn_power_limit{50.0};       // mW per RU
  double demand{300e3};               // bps per UE
  std::uint64_t rng_seed{1};

  double macro_height{30.0};
  double lpn_height{10.0};
  double ue_height{1.5};
  double noise_psd{-174.0};            // dBm/Hz
  double resource_bandwidth{180e3};    // Hz
  double cell_bandwidth{4.5e6};        // Hz
};

inline std::size_t num_resource_units(const ScenarioConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.cell_bandwidth / cfg.resource_bandwidth));
}

inline void validate(const ScenarioConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("scenario config: ") + what);
  };
  require(cfg.num_macro_sites >= 1, "num_macro_sites must be >= 1");
  require(cfg.ues_per_site >= 1, "ues_per_site must be >= 1");
  require(cfg.inter_site_distance > 0.0, "inter_site_distance must be > 0");
  require(cfg.carrier_frequency >= 1500.0 && cfg.carrier_frequency <= 2000.0,
          "carrier_frequency must lie in [1500, 2000] MHz for COST-231-HATA");
  require(cfg.shadowing_stddev >= 0.0, "shadowing_stddev must be >= 0");
  require(cfg.macro_power_limit > 0.0 && cfg.lpn_power_limit > 0.0, "power limits must be > 0");
  require(cfg.demand > 0.0, "demand must be > 0");
  require(cfg.macro_height > 0.0 && cfg.lpn_height > 0.0 && cfg.ue_height > 0.0, "antenna heights must be > 0");
  require(cfg.resource_bandwidth > 0.0 && cfg.cell_bandwidth >= cfg.resource_bandwidth,
          "cell bandwidth must hold at least one resource unit");
}

// Hexagonal site centres in spiral order: the centre, then ring 1 (6 sites),
// ring 2 (12 sites), ... Neighbouring centres are `isd` apart.
inline std::vector<Point> hex_site_centers(std::size_t count, double isd) {
  std::vector<Point> out;
  out.reserve(count);
  if (count == 0) return out;
  out.push_back({0.0, 0.0});
  // Axial directions for a flat-topped-cell lattice (pointy-topped site grid).
  constexpr int dq[6] = {1, 0, -1, -1, 0, 1};
  constexpr int dr[6] = {0, 1, 1, 0, -1, -1};
  auto to_xy = [isd](int q, int r) {
    return Point{isd * (q + 0.5 * r), isd * (std::sqrt(3.0) / 2.0) * r};
  };
  for (int ring = 1; out.size() < count; ++ring) {
    int q = ring * dq[4];
    int r = ring * dr[4];
    for (int side = 0; side < 6 && out.size() < count; ++side) {
      for (int step = 0; step < ring && out.size() < count; ++step) {
        out.push_back(to_xy(q, r));
        q += dq[side];
        r += dr[side];
      }
    }
  }
  return out;
}

// True if `p` lies inside the hexagon of inradius isd/2 centred at `c`,
// oriented so that neighbouring site centres face hexagon edges.
inline bool in_site_hexagon(Point p, Point c, double isd) {
  const double dx = p.x - c.x;
  const double dy = p.y - c.y;
  const double h = isd / 2.0;
  for (int k = 0; k < 6; ++k) {
    const double a = k * std::numbers::pi / 3.0;
    if (dx * std::cos(a) + dy * std::sin(a) > h) return false;
  }
  return true;
}

inline Point uniform_in_hexagon(RandomStream& rng, Point c, double isd) {
  const double circumradius = isd / std::sqrt(3.0);
  for (;;) {
    const Point p{c.x + rng.uniform(-circumradius, circumradius), c.y + rng.uniform(-circumradius, circumradius)};
    if (in_site_hexagon(p, c, isd)) return p;
  }
}

// Builds the scenario: one macro per hexagon centre, `lpns_per_site` LPNs and
// `ues_per_site` UEs uniform in each hexagon, COST-231-HATA plus i.i.d.
// log-normal shadowing per (cell, UE) link. Draw order is fixed (LPN positions,
// UE positions, then shadowing row by row), so the seed determines the result.
inline Scenario generate_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  RandomStream rng{cfg.rng_seed};
  const auto sites = hex_site_centers(cfg.num_macro_sites, cfg.inter_site_distance);

  Scenario s;
  for (std::size_t k = 0; k < sites.size(); ++k)
    s.cells.push_back(Cell{s.cells.size(), CellKind::Macro, sites[k], cfg.macro_height, cfg.macro_power_limit,
                           cfg.macro_power_limit});
  for (const auto& site : sites)
    for (std::size_t k = 0; k < cfg.lpns_per_site; ++k)
      s.cells.push_back(Cell{s.cells.size(), CellKind::Lpn, uniform_in_hexagon(rng, site, cfg.inter_site_distance),
                             cfg.lpn_height, cfg.lpn_power_limit, cfg.lpn_power_limit});
  for (const auto& site : sites)
    for (std::size_t k = 0; k < cfg.ues_per_site; ++k)
      s.ues.push_back(UserEquipment{s.ues.size(), uniform_in_hexagon(rng, site, cfg.inter_site_distance), cfg.demand});

  s.gain = GainMatrix(s.cells.size(), s.ues.size());
  for (const auto& c : s.cells) {
    for (const auto& ue : s.ues) {
      const double loss = path_loss_db(distance(c.position, ue.position), cfg.carrier_frequency, c.antenna_height,
                                       cfg.ue_height);
      const double shadow = cfg.shadowing_stddev > 0.0 ? rng.normal(0.0, cfg.shadowing_stddev) : 0.0;
      s.gain(c.id, ue.id) = linear_gain(loss, shadow);
    }
  }
  s.noise_power = noise_per_resource_unit(cfg.noise_psd, cfg.resource_bandwidth);
  s.num_resource_units = num_resource_units(cfg);
  s.resource_bandwidth = cfg.resource_bandwidth;
  validate(s);
  return s;
}

}  // namespace hetnet
