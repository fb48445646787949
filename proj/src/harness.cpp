#include "nanoflow/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "nanoflow/errors.hpp"
#include "nanoflow/rng.hpp"

namespace nanoflow::benchmark {

EventSeeds event_seeds(std::uint64_t seed, int event_id) {
  const std::uint64_t base = derive_seed(seed, static_cast<std::uint64_t>(event_id));
  return {derive_seed(base, 0), derive_seed(base, 1), derive_seed(base, 2), derive_seed(base, 3)};
}

EventRun simulate_event(const vasculature::VesselGraph& graph, const ScenarioSettings& settings,
                        const TargetEvent& event, std::uint64_t seed) {
  const EventSeeds seeds = event_seeds(seed, event.id);
  auto traces = vasculature::simulate_mobility(graph, settings.device_count, settings.duration_s,
                                               seeds.mobility);
  for (auto& tr : traces) {
    vasculature::UpsampleParams p = settings.upsample;
    p.seed = derive_seed(seeds.upsample, static_cast<std::uint64_t>(tr.device_id));
    tr = vasculature::upsample_trace(tr, p);
  }

  simcore::SimulationInput in;
  in.graph = &graph;
  in.traces = traces;
  in.anchors = settings.anchors;
  in.scenario = {event.position, settings.detection_radius_cm, settings.sense_rate_hz};
  in.energy = settings.energy;
  in.channel = settings.channel;
  in.protocol = settings.protocol;
  in.protocol.record_timeline = false;
  in.duration_s = settings.duration_s;
  in.seed = seeds.simulation;
  auto result = simcore::run_simulation(in);

  EventRun run;
  run.truth = event;
  run.records = std::move(result.records);
  run.stats = result.stats;
  run.consumed_joules = std::move(result.consumed_joules);
  return run;
}

std::vector<EventRun> run_event_simulations(const vasculature::VesselGraph& graph,
                                            const ScenarioSettings& settings,
                                            std::span<const TargetEvent> events, int workers,
                                            std::uint64_t seed) {
  std::vector<EventRun> runs(events.size());
  parallel_for(events.size(), workers, [&](std::size_t i) {
    try {
      runs[i] = simulate_event(graph, settings, events[i], seed);
    } catch (const std::exception& e) {
      runs[i] = EventRun{};
      runs[i].truth = events[i];
      runs[i].error = e.what();
    }
  });
  return runs;
}

namespace {

std::vector<simcore::RawRecord> prefix(std::span<const simcore::RawRecord> records, double t) {
  std::vector<simcore::RawRecord> out;
  for (const auto& r : records) {
    if (r.report_time_s <= t) out.push_back(r);
  }
  return out;
}

RegionEstimate localize(const vasculature::VesselGraph& graph, const EventRun& run,
                        std::span<const simcore::RawRecord> records, const Localizer& localizer,
                        std::uint64_t seed) {
  if (run.error) {
    RegionEstimate none;
    none.event_id = run.truth.id;
    return none;
  }
  auto e = localizer.estimate(run.truth.id, records, graph, event_seeds(seed, run.truth.id).localizer);
  e.event_id = run.truth.id;
  return with_centroid(std::move(e), graph);
}

}  // namespace

std::vector<EventOutcome> localize_runs(const vasculature::VesselGraph& graph,
                                        std::span<const EventRun> runs, const Localizer& localizer,
                                        std::uint64_t seed) {
  std::vector<EventOutcome> out;
  out.reserve(runs.size());
  for (const auto& run : runs) {
    out.push_back({run.truth, localize(graph, run, run.records, localizer, seed)});
  }
  return out;
}

MetricsReport evaluate_runs(const vasculature::VesselGraph& graph, std::span<const EventRun> runs,
                            const Localizer& localizer, std::span<const double> sim_times_s,
                            std::uint64_t seed, bool correct_only) {
  std::vector<TargetEvent> truths;
  std::vector<RegionEstimate> estimates;
  for (const auto& o : localize_runs(graph, runs, localizer, seed)) {
    truths.push_back(o.truth);
    estimates.push_back(o.estimate);
  }
  MetricsReport report = compute_metrics(estimates, truths, graph);
  report.point_errors_correct_only = correct_only;

  if (localizer.uses_records()) {
    for (double t : sim_times_s) {
      std::vector<RegionEstimate> at_t;
      at_t.reserve(runs.size());
      for (const auto& run : runs) {
        const auto recs = prefix(run.records, t);
        at_t.push_back(localize(graph, run, recs, localizer, seed));
      }
      report.by_sim_time_s[t] = summarize(at_t, truths, graph);
    }
  }

  double sum = 0.0;
  double peak = 0.0;
  std::size_t devices = 0;
  for (const auto& run : runs) {
    if (run.error) ++report.failed_runs;
    for (double j : run.consumed_joules) {
      sum += j * 1e12;
      peak = std::max(peak, j * 1e12);
      ++devices;
    }
  }
  report.energy.devices = devices;
  report.energy.mean_consumed_pj = devices ? sum / static_cast<double>(devices) : 0.0;
  report.energy.max_consumed_pj = peak;
  return report;
}

MetricsReport run_benchmark(const vasculature::VesselGraph& graph,
                            const ScenarioSettings& settings, std::span<const TargetEvent> events,
                            const Localizer& localizer, int workers, std::uint64_t seed,
                            std::span<const double> sim_times_s, bool correct_only) {
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  const auto runs = run_event_simulations(graph, settings, events, workers, seed);
  return evaluate_runs(graph, runs, localizer, sim_times_s, seed, correct_only);
}

int default_workers() {
  if (const char* env = std::getenv("NANOFLOW_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 4096) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace nanoflow::benchmark
