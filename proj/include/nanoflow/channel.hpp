#pragma once

/**
 * @file channel.hpp
 * @brief THz in-body link budget: layered path loss, Doppler shift, SINR and
 * the per-packet reception decision.
 */

#include <span>
#include <string>
#include <vector>

namespace nanoflow::channel {

inline constexpr double kSpeedOfLightMS = 299792458.0;
/// Cap applied when the SINR denominator vanishes.
inline constexpr double kMaxSinrDb = 200.0;

struct Layer {
  std::string name;
  double atten_db_per_cm = 0.0;
  double thickness_cm = 0.0;

  friend bool operator==(const Layer&, const Layer&) = default;
};

std::vector<Layer> default_layers();

struct ChannelConfig {
  double f_c_hz = 1e12;
  double bandwidth_hz = 10e9;
  double tx_power_dbm = -20.0;
  double rx_sensitivity_dbm = -110.0;
  double sinr_threshold_db = 10.0;
  double noise_floor_dbm = -130.0;
  std::vector<Layer> layers = default_layers();
  double spreading_exponent = 2.0;
  double doppler_penalty_db_per_mhz = 0.0;
  /// Bits carried per hertz of bandwidth per second.
  double spectral_efficiency = 0.5;

  void validate() const;
};

/// Free-space spreading term (floored at 0 dB) plus the layer losses, the
/// layers being traversed in order up to the link distance.
double path_loss_db(double distance_cm, const ChannelConfig& cfg);

/// Shift in Hz for a line-of-sight speed in cm/s, positive when closing.
double doppler_shift_hz(double relative_speed_cm_s, double f_c_hz);

constexpr double received_power_dbm(double tx_dbm, double pl_db) {
  return tx_dbm - pl_db;
}

double dbm_to_mw(double dbm);

double sinr_db(double signal_dbm, std::span<const double> interferers_dbm,
               double noise_dbm);

enum class Reception { Delivered, DiscardSensitivity, DiscardCollision };

Reception reception_decision(double rx_dbm, double sinr, const ChannelConfig& cfg);

/// Extra attenuation applied for a Doppler shift (0 with default config).
double doppler_penalty_db(double shift_hz, const ChannelConfig& cfg);

/// Time on air for a packet of `bits`.
double airtime_s(int bits, const ChannelConfig& cfg);

/// Largest distance at which tx_power_dbm still meets rx_sensitivity_dbm.
/// Infinite if the loss never reaches the budget.
double max_range_cm(double tx_dbm, const ChannelConfig& cfg);

const char* to_string(Reception r);

}  // namespace nanoflow::channel
