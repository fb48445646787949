#pragma once

/**
 * @file simcore.hpp
 * @brief Discrete-event run of one scenario: anchor beaconing, sensing,
 * backscattered responses and circulation-time resets.
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "nanoflow/channel.hpp"
#include "nanoflow/energy.hpp"
#include "nanoflow/geometry.hpp"
#include "nanoflow/vasculature.hpp"

namespace nanoflow::simcore {

struct Anchor {
  std::uint16_t mac = 0xA000;
  Position3 position;
  double beacon_interval_s = 0.1;
  double tx_power_dbm = -20.0;
};

struct EventScenario {
  Position3 target;
  double detection_radius_cm = 1.0;
  double sense_rate_hz = 3.0;
};

enum class ResetPolicy {
  /// Reset after a response goes out while the device is in the heart
  /// region (on a heart vessel, or nearest to one). A passage without anchor contact leaves the counters running.
  BeaconContact,
  /// Reset on every trace step entering a heart vessel, contact or not.
  HeartPassage,
};

struct ProtocolConfig {
  int beacon_bits = 16;
  int response_bits = 48;
  /// Responses start uniformly within this window after the beacon ends.
  double response_window_s = 100 * 1e-9;
  /// Minimum spacing between two responses of one device.
  double report_holdoff_s = 2.0;
  /// Response power targets anchor sensitivity plus this margin.
  double link_margin_db = 3.0;
  ResetPolicy reset_policy = ResetPolicy::BeaconContact;
  bool record_timeline = true;
};

struct RawRecord {
  double report_time_s = 0.0;
  std::uint16_t device_mac = 0;
  double circulation_time_s = 0.0;
  int event_bit = 0;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

struct EnergySample {
  double time_s = 0.0;
  std::uint16_t device_mac = 0;
  double energy_pj = 0.0;
  bool powered = false;

  friend bool operator==(const EnergySample&, const EnergySample&) = default;
};

struct RunStats {
  std::uint64_t beacons_sent = 0;
  std::uint64_t beacons_delivered = 0;
  std::uint64_t beacons_below_sensitivity = 0;
  std::uint64_t beacons_collided = 0;
  std::uint64_t beacons_ignored_off = 0;
  std::uint64_t responses_sent = 0;
  std::uint64_t responses_skipped_energy = 0;
  std::uint64_t responses_delivered = 0;
  std::uint64_t responses_collided = 0;
  std::uint64_t responses_below_sensitivity = 0;
  std::uint64_t sense_ticks = 0;
  std::uint64_t detections = 0;
  std::uint64_t resets = 0;
  double max_doppler_shift_hz = 0.0;

  friend bool operator==(const RunStats&, const RunStats&) = default;
};

struct SimulationInput {
  const vasculature::VesselGraph* graph = nullptr;
  /// One (usually upsampled) trace per device; device i gets MAC i.
  std::span<const vasculature::MobilityTrace> traces;
  std::vector<Anchor> anchors;
  EventScenario scenario;
  energy::EnergyConfig energy;
  channel::ChannelConfig channel;
  ProtocolConfig protocol;
  double duration_s = 1000.0;
  std::uint64_t seed = 0;
};

struct SimulationResult {
  /// Sorted by report time, then MAC.
  std::vector<RawRecord> records;
  std::vector<EnergySample> timeline;
  /// Joules spent per device.
  std::vector<double> consumed_joules;
  RunStats stats;
};

/// Throws ConfigMismatch when a trace ends before duration_s or no anchor
/// is given.
SimulationResult run_simulation(const SimulationInput& input);

/// Given the received beacon power, the response power that lands the reply
/// at sensitivity + margin, capped at tx_cap_dbm.
double response_tx_power_dbm(double beacon_rx_dbm, double anchor_tx_dbm,
                             double tx_cap_dbm, const channel::ChannelConfig& ch,
                             const ProtocolConfig& proto);

void write_raw_csv(std::ostream& out, std::span<const RawRecord> records);
void write_raw_csv(const std::filesystem::path& path, std::span<const RawRecord> records);
/// Throws ExternalDataError on malformed content.
std::vector<RawRecord> read_raw_csv(std::istream& in);
std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path);

void write_energy_csv(std::ostream& out, std::span<const EnergySample> samples);

}  // namespace nanoflow::simcore
