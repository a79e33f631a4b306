#include <cmath>

#include <gtest/gtest.h>

#include "hetnet/generate.hpp"
#include "hetnet/propagation.hpp"
#include "hetnet/random.hpp"

using namespace hetnet;

TEST(PathLoss, OneKilometreAtTwoGigahertz) {
  // Hand evaluation of the urban formula with C_m = 0.
  EXPECT_NEAR(path_loss_db(1000.0, 2000.0, 30.0, 1.5), 137.74400841317347, 1e-9);
}

TEST(PathLoss, DoublingDistanceAddsSlopeTimesLog2) {
  const double slope = (44.9 - 6.55 * std::log10(30.0)) * std::log10(2.0);
  for (double d : {50.0, 300.0, 1000.0, 4000.0})
    EXPECT_NEAR(path_loss_db(2 * d, 2000.0, 30.0, 1.5) - path_loss_db(d, 2000.0, 30.0, 1.5), slope, 1e-9);
}

TEST(PathLoss, ClampedBelowTenMetres) {
  EXPECT_EQ(path_loss_db(1.0, 2000.0, 30.0, 1.5), path_loss_db(10.0, 2000.0, 30.0, 1.5));
  EXPECT_EQ(path_loss_db(0.0, 1800.0, 10.0, 1.5), path_loss_db(10.0, 1800.0, 10.0, 1.5));
  EXPECT_LT(path_loss_db(10.0, 2000.0, 30.0, 1.5), path_loss_db(11.0, 2000.0, 30.0, 1.5));
}

TEST(LinearGain, DecibelConversion) {
  EXPECT_DOUBLE_EQ(linear_gain(0.0, 0.0), 1.0);
  EXPECT_NEAR(linear_gain(10.0, 0.0), 0.1, 1e-15);
  EXPECT_NEAR(linear_gain(100.0, 3.0), 5.011872336272715e-11, 1e-24);
}

TEST(Noise, PerResourceUnit) {
  EXPECT_NEAR(noise_per_resource_unit(-174.0, 180e3), 7.165929069962951e-13, 1e-24);
  EXPECT_NEAR(noise_per_resource_unit(-174.0, 1.0), std::pow(10.0, -17.4), 1e-30);
  EXPECT_NEAR(noise_per_resource_unit(0.0, 1.0), 1.0, 1e-15);
}

TEST(Random, StreamIsReproducible) {
  RandomStream a{42}, b{42}, c{43};
  for (int k = 0; k < 100; ++k) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
  EXPECT_NE(RandomStream{42}.uniform(), c.uniform());
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
}

TEST(Random, NormalMoments) {
  RandomStream r{7};
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double v = r.normal(0.0, 8.0);
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.1);
  EXPECT_NEAR(std::sqrt(sq / n), 8.0, 0.1);
}

TEST(HexLayout, SpiralRings) {
  const auto c = hex_site_centers(19, 500.0);
  ASSERT_EQ(c.size(), 19u);
  EXPECT_NEAR(c[0].x, 0.0, 1e-9);
  EXPECT_NEAR(c[0].y, 0.0, 1e-9);
  for (std::size_t k = 1; k < 7; ++k) EXPECT_NEAR(distance(c[k], c[0]), 500.0, 1e-9);
  for (std::size_t k = 7; k < 19; ++k) EXPECT_GT(distance(c[k], c[0]), 500.0 * 1.5);
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t b = a + 1; b < c.size(); ++b) EXPECT_GT(distance(c[a], c[b]), 500.0 - 1e-6);
}

TEST(HexLayout, SamplesStayInTheirHexagon) {
  RandomStream r{3};
  const Point centre{250.0, -433.0};
  for (int k = 0; k < 2000; ++k) {
    const auto p = uniform_in_hexagon(r, centre, 500.0);
    EXPECT_TRUE(in_site_hexagon(p, centre, 500.0));
    EXPECT_LE(distance(p, centre), 500.0 / std::sqrt(3.0) + 1e-9);
  }
  EXPECT_FALSE(in_site_hexagon({centre.x + 260.0, centre.y}, centre, 500.0));
}

TEST(Generate, DefaultLayoutSizes) {
  const auto s = generate_scenario(ScenarioConfig{});
  EXPECT_EQ(s.num_cells(), 21u);
  EXPECT_EQ(s.num_lpns(), 14u);
  EXPECT_EQ(s.num_ues(), 210u);
  EXPECT_EQ(s.gain.rows(), 21u);
  EXPECT_EQ(s.gain.cols(), 210u);
  EXPECT_EQ(s.num_resource_units, 25u);
  EXPECT_EQ(num_resource_units(ScenarioConfig{}), 25u);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(s.cells[i].kind, CellKind::Macro);
    EXPECT_EQ(s.cells[i].power_limit, 200.0);
    EXPECT_EQ(s.cells[i].pilot_power, 200.0);
  }
  for (std::size_t i = 7; i < 21; ++i) {
    EXPECT_EQ(s.cells[i].kind, CellKind::Lpn);
    EXPECT_EQ(s.cells[i].power_limit, 50.0);
  }
  for (const auto& u : s.ues) EXPECT_EQ(u.demand, 300e3);
  EXPECT_NEAR(s.noise_power, 7.165929069962951e-13, 1e-24);
}

TEST(Generate, DegenerateSingleCell) {
  ScenarioConfig cfg;
  cfg.num_macro_sites = 1;
  cfg.lpns_per_site = 0;
  cfg.ues_per_site = 1;
  const auto s = generate_scenario(cfg);
  EXPECT_EQ(s.num_cells(), 1u);
  EXPECT_EQ(s.num_ues(), 1u);
  EXPECT_EQ(s.gain.rows(), 1u);
  EXPECT_EQ(s.gain.cols(), 1u);
  EXPECT_GT(s.gain(0, 0), 0.0);
}

TEST(Generate, SameSeedSameScenario) {
  ScenarioConfig cfg;
  cfg.rng_seed = 99;
  const auto a = generate_scenario(cfg);
  const auto b = generate_scenario(cfg);
  EXPECT_TRUE(a == b);
  cfg.rng_seed = 100;
  EXPECT_FALSE(a == generate_scenario(cfg));
}

TEST(Generate, GainDecreasesWithDistanceWithoutShadowing) {
  ScenarioConfig cfg;
  cfg.shadowing_stddev = 0.0;
  const auto s = generate_scenario(cfg);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t a = 0; a < s.num_ues(); a += 7) {
      for (std::size_t b = 0; b < s.num_ues(); b += 11) {
        const double da = std::max(10.0, distance(s.cells[i].position, s.ues[a].position));
        const double db = std::max(10.0, distance(s.cells[i].position, s.ues[b].position));
        if (da < db) {
          EXPECT_GT(s.gain(i, a), s.gain(i, b));
        }
      }
    }
  }
}

TEST(Generate, EntitiesInsideTheirSite) {
  ScenarioConfig cfg;
  cfg.rng_seed = 5;
  const auto s = generate_scenario(cfg);
  const auto sites = hex_site_centers(cfg.num_macro_sites, cfg.inter_site_distance);
  for (std::size_t k = 0; k < 14; ++k)
    EXPECT_TRUE(in_site_hexagon(s.cells[7 + k].position, sites[k / 2], cfg.inter_site_distance));
  for (std::size_t j = 0; j < s.num_ues(); ++j)
    EXPECT_TRUE(in_site_hexagon(s.ues[j].position, sites[j / 30], cfg.inter_site_distance));
}

TEST(Generate, RejectsFrequencyOutsideModelRange) {
  ScenarioConfig cfg;
  cfg.carrier_frequency = 2600.0;
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);
  cfg.carrier_frequency = 1400.0;
  EXPECT_THROW(generate_scenario(cfg), std::invalid_argument);
  cfg.carrier_frequency = 1500.0;
  EXPECT_NO_THROW(generate_scenario(cfg));
}

TEST(Scenario, ValidateRejectsBrokenInstances) {
  auto s = generate_scenario(ScenarioConfig{});
  auto bad = s;
  bad.noise_power = 0.0;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad = s;
  bad.ues[3].demand = 0.0;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad = s;
  bad.cells[2].power_limit = -1.0;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad = s;
  bad.gain(0, 0) = -1.0;
  EXPECT_THROW(validate(bad), std::invalid_argument);
  bad = s;
  bad.cells[4].id = 9;
  EXPECT_THROW(validate(bad), std::invalid_argument);
}

TEST(Scenario, UniformDemand) {
  const auto s = with_uniform_demand(generate_scenario(ScenarioConfig{}), 123.0);
  for (const auto& u : s.ues) EXPECT_EQ(u.demand, 123.0);
  EXPECT_THROW(validate(with_uniform_demand(s, 0.0)), std::invalid_argument);
}
