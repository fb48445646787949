#pragma once

/**
 * @file harness.hpp
 * @brief One independent simulation per target event, spread over a worker
 * pool and aggregated in event-id order.
 */

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nanoflow/localizer.hpp"
#include "nanoflow/metrics.hpp"
#include "nanoflow/sampling.hpp"
#include "nanoflow/simcore.hpp"
#include "nanoflow/vasculature.hpp"

namespace nanoflow::benchmark {

/// Everything a single event run needs apart from the target itself.
struct ScenarioSettings {
  int device_count = 64;
  double duration_s = 1000.0;
  vasculature::UpsampleParams upsample;
  std::vector<simcore::Anchor> anchors;
  double detection_radius_cm = 1.0;
  double sense_rate_hz = 3.0;
  energy::EnergyConfig energy;
  channel::ChannelConfig channel;
  simcore::ProtocolConfig protocol;
};

struct EventRun {
  TargetEvent truth;
  std::vector<simcore::RawRecord> records;
  simcore::RunStats stats;
  std::vector<double> consumed_joules;
  std::optional<std::string> error;
};

/// Seeds of the substreams used by one event run.
struct EventSeeds {
  std::uint64_t mobility;
  std::uint64_t upsample;
  std::uint64_t simulation;
  std::uint64_t localizer;
};
EventSeeds event_seeds(std::uint64_t seed, int event_id);

/// Simulates one event. Throws on invalid input.
EventRun simulate_event(const vasculature::VesselGraph& graph, const ScenarioSettings& settings,
                        const TargetEvent& event, std::uint64_t seed);

/// Runs every event; failures are captured in EventRun::error.
/// Result order follows `events`, independent of `workers`.
std::vector<EventRun> run_event_simulations(const vasculature::VesselGraph& graph,
                                            const ScenarioSettings& settings,
                                            std::span<const TargetEvent> events, int workers,
                                            std::uint64_t seed);

/// Runs f(i) for i in [0, n) on `workers` threads.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& f);

/// Localizes each run on records up to every time prefix and on the full run.
MetricsReport evaluate_runs(const vasculature::VesselGraph& graph, std::span<const EventRun> runs,
                            const Localizer& localizer, std::span<const double> sim_times_s,
                            std::uint64_t seed, bool correct_only = false);

/// Per-event estimates on the full record set, for caching.
std::vector<EventOutcome> localize_runs(const vasculature::VesselGraph& graph,
                                        std::span<const EventRun> runs, const Localizer& localizer,
                                        std::uint64_t seed);

MetricsReport run_benchmark(const vasculature::VesselGraph& graph,
                            const ScenarioSettings& settings, std::span<const TargetEvent> events,
                            const Localizer& localizer, int workers, std::uint64_t seed,
                            std::span<const double> sim_times_s = {}, bool correct_only = false);

/// NANOFLOW_WORKERS if set and valid, else hardware concurrency (>= 1).
int default_workers();

}  // namespace nanoflow::benchmark

#include "nanoflow/detail/parallel.hpp"
