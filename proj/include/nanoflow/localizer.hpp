#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <vector>

#include "nanoflow/metrics.hpp"
#include "nanoflow/simcore.hpp"
#include "nanoflow/vasculature.hpp"

namespace nanoflow::benchmark {

/// Turns the raw records of one simulation run into a region estimate.
class Localizer {
 public:
  virtual ~Localizer() = default;
  virtual RegionEstimate estimate(int event_id, std::span<const simcore::RawRecord> records,
                                  const vasculature::VesselGraph& graph,
                                  std::uint64_t seed) const = 0;
  /// False when the estimate does not depend on the records passed in, so
  /// per-simulation-time metrics are meaningless.
  virtual bool uses_records() const { return true; }
};

/// One loop the baseline can match a circulation time against.
struct LoopCandidate {
  double expected_time_s = 0.0;
  /// Vessel reported when this loop explains the records best.
  int region_id = 0;
  /// Probability that a device takes this loop.
  double probability = 1.0;
};

struct BaselineOptions {
  /// Must match the scenario the records came from.
  double detection_radius_cm = 1.0;
  double sense_rate_hz = 3.0;
  /// Kernel width as a fraction of a loop's expected time.
  double kernel_rel_width = 0.02;
  /// Records longer than this multiple of the longest loop span several
  /// circulations and are skipped.
  double compound_cutoff = 1.5;
};

/// Loop-time classifier over the vessels of the graph.
///
/// Each record is matched against every heart loop with a Gaussian kernel
/// around the loop's expected time (width proportional to that time). A
/// candidate vessel explains a positive record through the loops passing it
/// and a negative one through the loops avoiding it or a missed detection.
/// Vessels are scored by log-likelihood plus a length prior; exact ties, as
/// between mirrored left/right vessels, are broken uniformly from the seed.
class BaselineLocalizer : public Localizer {
 public:
  explicit BaselineLocalizer(const vasculature::VesselGraph& graph, BaselineOptions options = {});
  /// One region per candidate loop, no geometry: each region is explained by
  /// the loops naming it, with certain detection and a flat prior.
  explicit BaselineLocalizer(std::vector<LoopCandidate> candidates, BaselineOptions options = {});

  RegionEstimate estimate(int event_id, std::span<const simcore::RawRecord> records,
                          const vasculature::VesselGraph& graph,
                          std::uint64_t seed) const override;

  /// Highest-scoring regions (all within tie tolerance), ascending id.
  std::vector<int> best_regions(std::span<const simcore::RawRecord> records) const;

  struct Loop {
    double expected_time_s = 0.0;
    double probability = 1.0;
  };
  struct Region {
    int region_id = 0;
    std::vector<std::size_t> loops;
    double detection_probability = 1.0;
    double log_prior = 0.0;
  };
  const std::vector<Loop>& loops() const { return loops_; }
  const std::vector<Region>& regions() const { return regions_; }

 private:
  BaselineOptions options_;
  std::vector<Loop> loops_;
  std::vector<Region> regions_;
  double max_loop_time_s_ = 0.0;
};

/// Probability of each heart loop under uniform routing, with the loop's
/// longest-dwell vessel not shared with other loops as its region.
std::vector<LoopCandidate> loop_candidates(const vasculature::VesselGraph& graph);

/// Chance a device sweeping past an event on this vessel samples within the
/// detection radius: min(1, 2 r f / v).
double detection_probability(const vasculature::Vessel& vessel, const BaselineOptions& options);

/// Estimates supplied by an outside tool, CSV
/// `event_id,estimated_region,x_cm,y_cm,z_cm`. Empty fields mean "none".
class ExternalLocalizer : public Localizer {
 public:
  /// Throws ExternalDataError on malformed content.
  static ExternalLocalizer from_csv(std::istream& in);
  static ExternalLocalizer from_csv(const std::filesystem::path& path);

  RegionEstimate estimate(int event_id, std::span<const simcore::RawRecord> records,
                          const vasculature::VesselGraph& graph,
                          std::uint64_t seed) const override;
  bool uses_records() const override { return false; }

  /// Throws ExternalDataError for regions outside the graph.
  void check_against(const vasculature::VesselGraph& graph) const;

 private:
  std::map<int, RegionEstimate> by_event_;
};

}  // namespace nanoflow::benchmark
