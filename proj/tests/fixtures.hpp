#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "hetnet/association.hpp"
#include "hetnet/scenario.hpp"

namespace fixture {

// Hand-built instance with M = B = 1. `gain[i][j]` is cell i -> UE j and
// `rate[j]` the normalised demand in nats, so the model sees exactly r_j.
inline hetnet::Scenario toy(const std::vector<hetnet::CellKind>& kinds, const std::vector<std::vector<double>>& gain,
                            const std::vector<double>& rate, double noise = 1.0,
                            const std::vector<double>& limits = {}) {
  hetnet::Scenario s;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const double limit = limits.empty() ? 1e9 : limits[i];
    s.cells.push_back(hetnet::Cell{i, kinds[i], {static_cast<double>(i), 0.0}, 10.0, limit, 1.0});
  }
  for (std::size_t j = 0; j < rate.size(); ++j)
    s.ues.push_back(hetnet::UserEquipment{j, {0.0, static_cast<double>(j)}, rate[j] / std::log(2.0)});
  s.gain = hetnet::GainMatrix(kinds.size(), rate.size());
  for (std::size_t i = 0; i < kinds.size(); ++i)
    for (std::size_t j = 0; j < rate.size(); ++j) s.gain(i, j) = gain[i][j];
  s.noise_power = noise;
  s.num_resource_units = 1;
  s.resource_bandwidth = 1.0;
  hetnet::validate(s);
  return s;
}

inline hetnet::Association serve(std::vector<std::size_t> serving) { return hetnet::Association{std::move(serving)}; }

// Random macro-only instance: n cells, up to 10 UEs, each UE with a strong
// link to its home cell and weak links elsewhere. Demands are kept small so
// that full load is reachable.
struct RandomInstance {
  hetnet::Scenario scenario;
  hetnet::Association assoc;
};

inline RandomInstance random_instance(std::mt19937_64& rng, std::size_t max_cells = 5, std::size_t max_ues = 10) {
  std::uniform_int_distribution<std::size_t> cells_dist(1, max_cells);
  const auto n = cells_dist(rng);
  std::uniform_int_distribution<std::size_t> ues_dist(n, std::max(n, max_ues));
  const auto ues = ues_dist(rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> gain(n, std::vector<double>(ues));
  std::vector<std::size_t> serving(ues);
  std::vector<double> rate(ues);
  for (std::size_t j = 0; j < ues; ++j) {
    serving[j] = j < n ? j : static_cast<std::size_t>(u(rng) * static_cast<double>(n)) % n;
    for (std::size_t i = 0; i < n; ++i) gain[i][j] = i == serving[j] ? 0.5 + 0.5 * u(rng) : 0.1 * u(rng);
    rate[j] = 0.05 + 0.3 * u(rng);
  }
  return {toy(std::vector<hetnet::CellKind>(n, hetnet::CellKind::Macro), gain, rate, 0.1 + u(rng)), serve(serving)};
}

}  // namespace fixture
