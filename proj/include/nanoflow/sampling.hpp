#pragma once

/**
 * @file sampling.hpp
 * @brief Dense target-event population and the five spatial sampling
 * strategies drawn from it.
 */

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nanoflow/metrics.hpp"
#include "nanoflow/vasculature.hpp"

namespace nanoflow::benchmark {

enum class Strategy { SRS, SSRS, CRS, RGS, SCS };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
inline constexpr Strategy kAllStrategies[] = {Strategy::SRS, Strategy::SSRS, Strategy::CRS,
                                              Strategy::RGS, Strategy::SCS};

inline constexpr std::size_t kDefaultDenseCount = 1368;

/// Preferred strategy when a benchmark targets all regions (nullopt) or a
/// single region type.
Strategy recommended_strategy(std::optional<vasculature::RegionType> focus = std::nullopt);

/// Candidate events spread along every vessel, vessels receiving points in
/// proportion to their length (at least one each). Ids are 0..count-1.
std::vector<TargetEvent> build_dense_set(const vasculature::VesselGraph& graph,
                                         std::size_t count = kDefaultDenseCount);

/// Largest-remainder apportionment of k over the given counts; remainder
/// ties go to the lower index.
std::vector<std::size_t> apportion(std::span<const std::size_t> counts, std::size_t k);

/// k distinct members of `dense`. Throws SampleTooLarge unless
/// 1 <= k <= dense.size().
std::vector<TargetEvent> sample_locations(std::span<const TargetEvent> dense, Strategy strategy,
                                          std::size_t k, std::uint64_t seed);

/// Cached outcome of one dense event.
struct EventOutcome {
  TargetEvent truth;
  RegionEstimate estimate;
};

struct CurvePoint {
  std::size_t k = 0;
  double region_accuracy = 0.0;
  double mean_point_error_cm = 0.0;
  double reliability = 0.0;
};

/// For each distinct size (ascending) samples k events and recomputes the
/// metrics on their cached outcomes.
std::vector<CurvePoint> convergence_curve(std::span<const EventOutcome> dense_results,
                                          Strategy strategy, std::vector<std::size_t> sizes,
                                          std::uint64_t seed,
                                          const vasculature::VesselGraph& graph,
                                          bool correct_only = false);

/// CSV `event_id,x_cm,y_cm,z_cm,region_id,region_type`.
void write_events_csv(std::ostream& out, std::span<const TargetEvent> events);
std::vector<TargetEvent> read_events_csv(std::istream& in);

/// Cached outcomes: the event columns followed by
/// `estimated_region,est_x_cm,est_y_cm,est_z_cm` (empty when absent).
void write_outcomes_csv(std::ostream& out, std::span<const EventOutcome> outcomes);
std::vector<EventOutcome> read_outcomes_csv(std::istream& in);

}  // namespace nanoflow::benchmark
