#pragma once

/**
 * @file metrics.hpp
 * @brief Region accuracy, point error and reliability over matched
 * (estimate, truth) sets.
 */

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nanoflow/geometry.hpp"
#include "nanoflow/vasculature.hpp"

namespace nanoflow::benchmark {

struct TargetEvent {
  int id = 0;
  Position3 position;
  /// Nearest vessel to position.
  int region_id = 0;
  vasculature::RegionType region_type = vasculature::RegionType::ArterialFast;

  friend bool operator==(const TargetEvent&, const TargetEvent&) = default;
};

struct RegionEstimate {
  int event_id = 0;
  std::optional<int> estimated_region;
  std::optional<Position3> point;

  bool has_estimate() const { return estimated_region.has_value() || point.has_value(); }
  friend bool operator==(const RegionEstimate&, const RegionEstimate&) = default;
};

/// Fills a missing point with the centroid of the estimated region.
RegionEstimate with_centroid(RegionEstimate e, const vasculature::VesselGraph& graph);

/// N_correct / N_total. Truths without a matching estimate count as wrong.
/// Throws MismatchedSets for an empty truth set, duplicate ids, or estimates
/// of unknown events.
double region_accuracy(std::span<const RegionEstimate> estimates,
                       std::span<const TargetEvent> truths);

/// Euclidean distance. Throws NoEstimate if the estimate carries no point.
double point_error(const RegionEstimate& estimate, const TargetEvent& truth);
/// As above, substituting the region centroid when only a region is given.
double point_error(const RegionEstimate& estimate, const TargetEvent& truth,
                   const vasculature::VesselGraph& graph);

/// Fraction of events that received any estimate.
double reliability(std::span<const RegionEstimate> estimates,
                   std::span<const TargetEvent> truths);

struct MetricsSummary {
  double region_accuracy = 0.0;
  std::size_t n_correct = 0;
  std::size_t n_total = 0;
  double reliability = 0.0;
  /// Every event with an estimate.
  std::vector<double> point_errors_cm;
  /// Only events whose region was right.
  std::vector<double> point_errors_correct_cm;

  double mean_point_error_cm(bool correct_only = false) const;
  nlohmann::json to_json(bool correct_only = false) const;
};

struct EnergySummary {
  std::size_t devices = 0;
  double mean_consumed_pj = 0.0;
  double max_consumed_pj = 0.0;
  nlohmann::json to_json() const;
};

struct MetricsReport {
  MetricsSummary overall;
  std::map<int, MetricsSummary> by_region_type;
  /// Keyed by simulation time prefix in seconds.
  std::map<double, MetricsSummary> by_sim_time_s;
  EnergySummary energy;
  std::size_t failed_runs = 0;
  std::string config_fingerprint;
  bool point_errors_correct_only = false;

  nlohmann::json to_json() const;
};

/// Summary plus region-type breakdown (types 0, 1, 2 always present).
MetricsReport compute_metrics(std::span<const RegionEstimate> estimates,
                              std::span<const TargetEvent> truths,
                              const vasculature::VesselGraph& graph);

MetricsSummary summarize(std::span<const RegionEstimate> estimates,
                         std::span<const TargetEvent> truths,
                         const vasculature::VesselGraph& graph);

std::string format_seconds_key(double t);

}  // namespace nanoflow::benchmark
