#include "nanoflow/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "nanoflow/csv_io.hpp"
#include "nanoflow/errors.hpp"
#include "nanoflow/rng.hpp"

namespace nanoflow::benchmark {

namespace {

constexpr double kTieTolerance = 1e-9;
constexpr double kBackground = 1e-12;

double loop_probability(const vasculature::VesselGraph& graph, const vasculature::HeartLoop& loop) {
  double p = 1.0;
  for (int v : loop.vessels) p /= static_cast<double>(graph.vessel(v).successors.size());
  return p;
}

}  // namespace

double detection_probability(const vasculature::Vessel& vessel, const BaselineOptions& options) {
  return std::min(1.0, 2.0 * options.detection_radius_cm * options.sense_rate_hz / vessel.speed_cm_s);
}

std::vector<LoopCandidate> loop_candidates(const vasculature::VesselGraph& graph) {
  const auto loops = vasculature::enumerate_heart_loops(graph);
  std::unordered_map<int, int> membership;
  for (const auto& loop : loops) {
    std::vector<int> vs = loop.vessels;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    for (int v : vs) ++membership[v];
  }
  std::vector<LoopCandidate> out;
  out.reserve(loops.size());
  for (const auto& loop : loops) {
    // Prefer vessels only this loop visits; otherwise the least shared.
    int best = -1;
    int best_share = std::numeric_limits<int>::max();
    double best_dwell = -1.0;
    for (int v : loop.vessels) {
      const auto& vessel = graph.vessel(v);
      if (vessel.is_heart) continue;
      const int share = membership[v];
      const double dwell = vessel.transit_time_s();
      if (share < best_share || (share == best_share && dwell > best_dwell)) {
        best = v;
        best_share = share;
        best_dwell = dwell;
      }
    }
    if (best < 0) best = loop.vessels.front();
    out.push_back({loop.expected_time_s, best, loop_probability(graph, loop)});
  }
  return out;
}

BaselineLocalizer::BaselineLocalizer(const vasculature::VesselGraph& graph, BaselineOptions options)
    : options_(options) {
  const auto loops = vasculature::enumerate_heart_loops(graph);
  std::vector<std::vector<std::size_t>> through(graph.size());
  for (std::size_t l = 0; l < loops.size(); ++l) {
    loops_.push_back({loops[l].expected_time_s, loop_probability(graph, loops[l])});
    std::vector<int> vs = loops[l].vessels;
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    for (int v : vs) through[static_cast<std::size_t>(v)].push_back(l);
  }
  double total_length = 0.0;
  for (const auto& v : graph.vessels()) {
    if (!v.is_heart) total_length += v.length_cm();
  }
  for (const auto& v : graph.vessels()) {
    auto& ls = through[static_cast<std::size_t>(v.id)];
    if (v.is_heart || ls.empty() || v.length_cm() <= 0.0) continue;
    regions_.push_back({v.id, std::move(ls), detection_probability(v, options_),
                        std::log(v.length_cm() / total_length)});
  }
  for (const auto& l : loops_) max_loop_time_s_ = std::max(max_loop_time_s_, l.expected_time_s);
}

BaselineLocalizer::BaselineLocalizer(std::vector<LoopCandidate> candidates, BaselineOptions options)
    : options_(options) {
  std::map<int, std::vector<std::size_t>> by_region;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    loops_.push_back({candidates[i].expected_time_s, candidates[i].probability});
    by_region[candidates[i].region_id].push_back(i);
    max_loop_time_s_ = std::max(max_loop_time_s_, candidates[i].expected_time_s);
  }
  for (auto& [id, ls] : by_region) regions_.push_back({id, std::move(ls), 1.0, 0.0});
}

std::vector<int> BaselineLocalizer::best_regions(std::span<const simcore::RawRecord> records) const {
  std::vector<int> out;
  if (regions_.empty()) return out;
  const bool any_positive = std::any_of(records.begin(), records.end(),
                                        [](const simcore::RawRecord& r) { return r.event_bit == 1; });
  if (!any_positive) return out;

  std::vector<double> score(regions_.size());
  for (std::size_t r = 0; r < regions_.size(); ++r) score[r] = regions_[r].log_prior;

  std::vector<double> weight(loops_.size());
  for (const auto& rec : records) {
    const double tau = rec.circulation_time_s;
    if (tau > options_.compound_cutoff * max_loop_time_s_) continue;
    double all = 0.0;
    for (std::size_t l = 0; l < loops_.size(); ++l) {
      const double width = options_.kernel_rel_width * loops_[l].expected_time_s;
      const double z = (tau - loops_[l].expected_time_s) / width;
      weight[l] = loops_[l].probability * std::exp(-0.5 * z * z);
      all += weight[l];
    }
    for (std::size_t r = 0; r < regions_.size(); ++r) {
      const auto& region = regions_[r];
      double through = 0.0;
      for (std::size_t l : region.loops) through += weight[l];
      const double d = region.detection_probability;
      const double like = rec.event_bit == 1 ? d * through : all - d * through;
      score[r] += std::log(std::max(0.0, like) + kBackground);
    }
  }

  const double best = *std::max_element(score.begin(), score.end());
  const double tol = kTieTolerance * std::max(1.0, std::abs(best));
  for (std::size_t r = 0; r < regions_.size(); ++r) {
    if (score[r] >= best - tol) out.push_back(regions_[r].region_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

RegionEstimate BaselineLocalizer::estimate(int event_id,
                                           std::span<const simcore::RawRecord> records,
                                           const vasculature::VesselGraph& graph,
                                           std::uint64_t seed) const {
  RegionEstimate out;
  out.event_id = event_id;
  const auto best = best_regions(records);
  if (best.empty()) return out;
  Rng rng(seed);
  const int pick = best.size() == 1 ? best[0] : best[rng.index(best.size())];
  out.estimated_region = pick;
  if (pick >= 0 && static_cast<std::size_t>(pick) < graph.size()) {
    out.point = vasculature::vessel_centroid(graph.vessel(pick));
  }
  return out;
}

ExternalLocalizer ExternalLocalizer::from_csv(std::istream& in) {
  const auto table = csv::read_table(in, {"event_id", "estimated_region", "x_cm", "y_cm", "z_cm"});
  ExternalLocalizer loc;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = i + 2;
    RegionEstimate e;
    e.event_id = static_cast<int>(csv::parse_int(row[0], line));
    if (!row[1].empty()) e.estimated_region = static_cast<int>(csv::parse_int(row[1], line));
    const bool any_coord = !row[2].empty() || !row[3].empty() || !row[4].empty();
    if (any_coord) {
      e.point = Position3{csv::parse_double(row[2], line), csv::parse_double(row[3], line),
                          csv::parse_double(row[4], line)};
    }
    if (!loc.by_event_.emplace(e.event_id, e).second) {
      throw ExternalDataError("duplicate event_id " + row[0] + " on line " + std::to_string(line));
    }
  }
  return loc;
}

ExternalLocalizer ExternalLocalizer::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return from_csv(in);
}

void ExternalLocalizer::check_against(const vasculature::VesselGraph& graph) const {
  for (const auto& [id, e] : by_event_) {
    if (e.estimated_region &&
        (*e.estimated_region < 0 || static_cast<std::size_t>(*e.estimated_region) >= graph.size())) {
      throw ExternalDataError("event " + std::to_string(id) + " names unknown region " +
                              std::to_string(*e.estimated_region));
    }
  }
}

RegionEstimate ExternalLocalizer::estimate(int event_id, std::span<const simcore::RawRecord>,
                                           const vasculature::VesselGraph& graph,
                                           std::uint64_t) const {
  const auto it = by_event_.find(event_id);
  if (it == by_event_.end()) {
    RegionEstimate none;
    none.event_id = event_id;
    return none;
  }
  return with_centroid(it->second, graph);
}

}  // namespace nanoflow::benchmark
