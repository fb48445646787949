#include "nanoflow/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nanoflow/errors.hpp"

namespace nanoflow::channel {

std::vector<Layer> default_layers() {
  return {{"vessel", 40.0, 0.1}, {"tissue", 30.0, 2.0}, {"skin", 20.0, 0.1}};
}

void ChannelConfig::validate() const {
  auto fail = [](const char* key, const char* what) {
    throw ConfigError(std::string("channel.") + key, what);
  };
  if (!(f_c_hz > 0.0)) fail("f_c_thz", "must be > 0");
  if (!(bandwidth_hz > 0.0)) fail("bandwidth_ghz", "must be > 0");
  if (!(rx_sensitivity_dbm < tx_power_dbm))
    fail("rx_sensitivity_dbm", "must be below tx_power_dbm");
  if (!(spreading_exponent >= 0.0)) fail("spreading_exponent", "must be >= 0");
  if (!(doppler_penalty_db_per_mhz >= 0.0))
    fail("doppler_penalty_db_per_mhz", "must be >= 0");
  if (!(spectral_efficiency > 0.0)) fail("spectral_efficiency", "must be > 0");
  for (const auto& l : layers) {
    if (!(l.atten_db_per_cm >= 0.0)) fail("layers", "atten_db_per_cm must be >= 0");
    if (!(l.thickness_cm >= 0.0)) fail("layers", "thickness_cm must be >= 0");
  }
}

double path_loss_db(double distance_cm, const ChannelConfig& cfg) {
  const double d = std::max(0.0, distance_cm);
  double spreading = 0.0;
  if (d > 0.0) {
    const double d_m = d / 100.0;
    spreading = 20.0 * std::log10(4.0 * std::numbers::pi * cfg.f_c_hz / kSpeedOfLightMS) +
                10.0 * cfg.spreading_exponent * std::log10(d_m);
    spreading = std::max(0.0, spreading);
  }
  double layers = 0.0;
  double remaining = d;
  for (const auto& l : cfg.layers) {
    const double span = std::min(l.thickness_cm, remaining);
    layers += span * l.atten_db_per_cm;
    remaining -= span;
    if (remaining <= 0.0) break;
  }
  return spreading + layers;
}

double doppler_shift_hz(double relative_speed_cm_s, double f_c_hz) {
  return f_c_hz * (relative_speed_cm_s / 100.0) / kSpeedOfLightMS;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double sinr_db(double signal_dbm, std::span<const double> interferers_dbm,
               double noise_dbm) {
  double denom = dbm_to_mw(noise_dbm);
  for (double i : interferers_dbm) denom += dbm_to_mw(i);
  if (!(denom > 0.0)) return kMaxSinrDb;
  return std::min(kMaxSinrDb, 10.0 * std::log10(dbm_to_mw(signal_dbm) / denom));
}

Reception reception_decision(double rx_dbm, double sinr, const ChannelConfig& cfg) {
  if (rx_dbm < cfg.rx_sensitivity_dbm) return Reception::DiscardSensitivity;
  if (sinr < cfg.sinr_threshold_db) return Reception::DiscardCollision;
  return Reception::Delivered;
}

double doppler_penalty_db(double shift_hz, const ChannelConfig& cfg) {
  return cfg.doppler_penalty_db_per_mhz * std::abs(shift_hz) / 1e6;
}

double airtime_s(int bits, const ChannelConfig& cfg) {
  return static_cast<double>(bits) / (cfg.bandwidth_hz * cfg.spectral_efficiency);
}

double max_range_cm(double tx_dbm, const ChannelConfig& cfg) {
  const double budget = tx_dbm - cfg.rx_sensitivity_dbm;
  if (path_loss_db(0.0, cfg) > budget) return 0.0;
  double hi = 1.0;
  while (path_loss_db(hi, cfg) <= budget) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (path_loss_db(mid, cfg) <= budget ? lo : hi) = mid;
  }
  return lo;
}

const char* to_string(Reception r) {
  switch (r) {
    case Reception::Delivered: return "Delivered";
    case Reception::DiscardSensitivity: return "DiscardSensitivity";
    case Reception::DiscardCollision: return "DiscardCollision";
  }
  return "?";
}

}  // namespace nanoflow::channel
