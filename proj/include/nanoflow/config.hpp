#pragma once

/**
 * @file config.hpp
 * @brief Run configuration: one JSON document with a nested object per
 * module. Omitted keys take the baseline defaults; unknown keys are errors.
 */

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "nanoflow/channel.hpp"
#include "nanoflow/energy.hpp"
#include "nanoflow/harness.hpp"
#include "nanoflow/sampling.hpp"
#include "nanoflow/simcore.hpp"
#include "nanoflow/vasculature.hpp"

namespace nanoflow {

struct RunConfig {
  std::uint64_t seed = 1;
  double duration_s = 1000.0;
  int device_count = 64;

  /// "default" or a graph-spec JSON path.
  std::string graph = "default";
  int upsample_factor = 3;
  double upsample_sigma_cm = 0.2;

  energy::EnergyConfig energy;
  channel::ChannelConfig channel;
  std::vector<simcore::Anchor> anchors{simcore::Anchor{}};
  simcore::ProtocolConfig protocol;

  Position3 target{0.0, 0.0, 0.0};
  double detection_radius_cm = 1.0;
  double sense_rate_hz = 3.0;

  std::size_t dense_count = benchmark::kDefaultDenseCount;
  benchmark::Strategy strategy = benchmark::Strategy::RGS;
  std::size_t k = 20;
  std::vector<double> sim_times_s{120.0, 300.0, 600.0, 900.0};
  std::vector<std::size_t> convergence_sizes{};
  bool point_errors_correct_only = false;

  /// Throws ConfigError naming the offending key.
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load(const std::filesystem::path& path);

  /// Fully resolved document; from_json(to_json()) round-trips.
  nlohmann::json to_json() const;
  /// Hex FNV-1a 64 of the compact resolved document.
  std::string fingerprint() const;

  /// Throws ConfigError("vasculature.graph", ...) when the graph is unusable.
  vasculature::VesselGraph load_graph() const;
  benchmark::ScenarioSettings scenario_settings() const;
  /// Longest of duration_s and the simulation-time prefixes.
  double benchmark_duration_s() const;

  void validate() const;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace nanoflow
