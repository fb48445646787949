#pragma once

/**
 * @file vasculature.hpp
 * @brief Simplified cardiovascular graph and nanodevice mobility traces.
 *
 * Vessels are straight segments with a constant blood speed. Devices flow
 * from vessel to vessel along successor links, picking a successor uniformly
 * at random at bifurcations. Every vessel must lie on a loop through the
 * heart.
 */

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nanoflow/geometry.hpp"

namespace nanoflow::vasculature {

enum class RegionType : int { ArterialFast = 0, Venous = 1, Transition = 2 };

inline constexpr double kMinDepthCm = -2.0;
inline constexpr double kMaxDepthCm = 2.0;

struct Vessel {
  int id = 0;
  std::string name;
  Position3 start;
  Position3 end;
  RegionType region_type = RegionType::ArterialFast;
  double speed_cm_s = 0.0;
  std::vector<int> successors;
  bool is_heart = false;

  double length_cm() const { return distance(start, end); }
  /// Time a device spends traversing the vessel.
  double transit_time_s() const { return length_cm() / speed_cm_s; }
};

/// Validated closed-loop vessel graph. Vessel ids are 0..N-1 and index
/// directly into vessels().
class VesselGraph {
 public:
  /// Throws InvalidGraph when any invariant is violated.
  explicit VesselGraph(std::vector<Vessel> vessels);

  std::span<const Vessel> vessels() const { return vessels_; }
  const Vessel& vessel(int id) const { return vessels_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return vessels_.size(); }
  int heart_id() const { return heart_id_; }

  /// Axis-aligned bounds of all segment endpoints.
  Position3 lower_bound() const { return lower_; }
  Position3 upper_bound() const { return upper_; }

 private:
  std::vector<Vessel> vessels_;
  int heart_id_ = 0;
  Position3 lower_;
  Position3 upper_;
};

/// The bundled 94-segment reference graph.
VesselGraph build_reference_vasculature();

/// Reads the graph-spec JSON document ({"vessels": [...]}).
VesselGraph graph_from_json(const nlohmann::json& doc);
VesselGraph load_graph_json(const std::filesystem::path& path);
nlohmann::json graph_to_json(const VesselGraph& graph);

Position3 vessel_centroid(const Vessel& vessel);

/// Vessel whose segment is nearest to p; ties go to the lowest id.
int locate_vessel(const VesselGraph& graph, const Position3& p);

/// A loop from the heart back to the heart, listed from heart_id onward.
struct HeartLoop {
  std::vector<int> vessels;
  double expected_time_s = 0.0;
};

/// Enumerates every simple cycle that starts and ends at heart_id.
/// Throws InvalidGraph if more than max_loops cycles exist.
std::vector<HeartLoop> enumerate_heart_loops(const VesselGraph& graph,
                                             std::size_t max_loops = 100000);

struct TraceSample {
  double time_s = 0.0;
  Position3 position;
  int vessel_id = 0;

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

struct MobilityTrace {
  int device_id = 0;
  double period_s = 1.0;
  std::vector<TraceSample> samples;
  /// Exact times at which the device entered a heart vessel (t = 0 included,
  /// since every device is released in the heart).
  std::vector<double> heart_entries_s;

  friend bool operator==(const MobilityTrace&, const MobilityTrace&) = default;
};

/// One 1 Hz trace per device over [0, duration_s]. Devices start at the
/// beginning of the heart vessel.
std::vector<MobilityTrace> simulate_mobility(const VesselGraph& graph,
                                             int device_count,
                                             double duration_s,
                                             std::uint64_t seed);

struct UpsampleParams {
  int factor = 3;
  double sigma_cm = 0.2;
  std::uint64_t seed = 0;
};

/// Inserts factor-1 jittered points between consecutive samples. Original
/// samples are kept bit-for-bit. Throws EmptyTrace for fewer than 2 samples.
MobilityTrace upsample_trace(const MobilityTrace& trace,
                             const UpsampleParams& params);

/// CSV `time_s,device_id,x_cm,y_cm,z_cm,vessel_id`.
void write_trace_csv(std::ostream& out, std::span<const MobilityTrace> traces);

}  // namespace nanoflow::vasculature
