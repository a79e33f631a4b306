#pragma once

#include <algorithm>
#include <cmath>

namespace hetnet {

// COST-231-HATA urban path loss, medium-city correction (C_m = 0).
// Distance in meters, clamped to 10 m; frequency in MHz; heights in meters.
inline double path_loss_db(double distance_m, double frequency_mhz, double base_height_m, double ue_height_m) {
  const double log_f = std::log10(frequency_mhz);
  const double log_hb = std::log10(base_height_m);
  const double d_km = std::max(distance_m / 1000.0, 0.01);
  const double ue_correction = (1.1 * log_f - 0.7) * ue_height_m - (1.56 * log_f - 0.8);
  return 46.3 + 33.9 * log_f - 13.82 * log_hb - ue_correction + (44.9 - 6.55 * log_hb) * std::log10(d_km);
}

inline double linear_gain(double path_loss_db, double shadow_db) {
  return std::pow(10.0, -(path_loss_db + shadow_db) / 10.0);
}

// Thermal noise over `bandwidth_hz` for a PSD given in dBm/Hz, in mW.
inline double noise_per_resource_unit(double psd_dbm_per_hz, double bandwidth_hz) {
  return std::pow(10.0, (psd_dbm_per_hz + 10.0 * std::log10(bandwidth_hz)) / 10.0);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace hetnet
