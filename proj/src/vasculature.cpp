#include "nanoflow/vasculature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>

#include "nanoflow/errors.hpp"
#include "nanoflow/rng.hpp"

namespace nanoflow::vasculature {

namespace {

constexpr double kSpeedTolerance = 1e-9;

bool speed_matches_region(RegionType type, double speed) {
  switch (type) {
    case RegionType::ArterialFast:
      return std::abs(speed - 20.0) <= kSpeedTolerance ||
             std::abs(speed - 10.0) <= kSpeedTolerance;
    case RegionType::Venous:
      return speed >= 2.0 - kSpeedTolerance && speed <= 4.0 + kSpeedTolerance;
    case RegionType::Transition:
      return std::abs(speed - 1.0) <= kSpeedTolerance;
  }
  return false;
}

bool depth_ok(const Position3& p) {
  return p.z >= kMinDepthCm && p.z <= kMaxDepthCm;
}

std::string describe(const Vessel& v) {
  std::ostringstream os;
  os << "vessel " << v.id;
  if (!v.name.empty()) os << " (" << v.name << ")";
  return os.str();
}

std::vector<bool> reachable(const std::vector<std::vector<int>>& adj,
                            int from) {
  std::vector<bool> seen(adj.size(), false);
  std::queue<int> q;
  q.push(from);
  seen[static_cast<std::size_t>(from)] = true;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int w : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        q.push(w);
      }
    }
  }
  return seen;
}

}  // namespace

VesselGraph::VesselGraph(std::vector<Vessel> vessels) {
  if (vessels.size() < 3) {
    throw InvalidGraph("graph needs at least 3 vessels, got " +
                       std::to_string(vessels.size()));
  }
  std::sort(vessels.begin(), vessels.end(),
            [](const Vessel& a, const Vessel& b) { return a.id < b.id; });
  const int n = static_cast<int>(vessels.size());
  for (int i = 0; i < n; ++i) {
    if (vessels[static_cast<std::size_t>(i)].id != i) {
      throw InvalidGraph("vessel ids must be unique and cover 0.." +
                         std::to_string(n - 1));
    }
  }

  heart_id_ = -1;
  for (const Vessel& v : vessels) {
    if (!is_finite(v.start) || !is_finite(v.end)) {
      throw InvalidGraph(describe(v) + ": non-finite coordinates");
    }
    if (!depth_ok(v.start) || !depth_ok(v.end)) {
      throw InvalidGraph(describe(v) + ": z outside [-2, 2] cm");
    }
    if (!(v.length_cm() > 0.0)) {
      throw InvalidGraph(describe(v) + ": zero-length segment");
    }
    if (!std::isfinite(v.speed_cm_s) ||
        !speed_matches_region(v.region_type, v.speed_cm_s)) {
      throw InvalidGraph(describe(v) + ": speed " +
                         std::to_string(v.speed_cm_s) +
                         " cm/s inconsistent with region type " +
                         std::to_string(static_cast<int>(v.region_type)));
    }
    if (v.successors.empty()) {
      throw InvalidGraph(describe(v) + ": no successors (open loop)");
    }
    for (int s : v.successors) {
      if (s < 0 || s >= n) {
        throw InvalidGraph(describe(v) + ": successor " + std::to_string(s) +
                           " does not exist");
      }
    }
    if (v.is_heart && heart_id_ < 0) heart_id_ = v.id;
  }
  if (heart_id_ < 0) throw InvalidGraph("no vessel is flagged as heart");

  std::vector<std::vector<int>> fwd(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> rev(static_cast<std::size_t>(n));
  for (const Vessel& v : vessels) {
    for (int s : v.successors) {
      fwd[static_cast<std::size_t>(v.id)].push_back(s);
      rev[static_cast<std::size_t>(s)].push_back(v.id);
    }
  }
  const auto from_heart = reachable(fwd, heart_id_);
  const auto to_heart = reachable(rev, heart_id_);
  for (const Vessel& v : vessels) {
    const auto i = static_cast<std::size_t>(v.id);
    if (!from_heart[i] || !to_heart[i]) {
      throw InvalidGraph(describe(v) + ": not on a loop through the heart");
    }
  }

  lower_ = {std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  upper_ = lower_ * -1.0;
  for (const Vessel& v : vessels) {
    for (const Position3& p : {v.start, v.end}) {
      lower_ = {std::min(lower_.x, p.x), std::min(lower_.y, p.y),
                std::min(lower_.z, p.z)};
      upper_ = {std::max(upper_.x, p.x), std::max(upper_.y, p.y),
                std::max(upper_.z, p.z)};
    }
  }
  vessels_ = std::move(vessels);
}

namespace {

Position3 position_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw InvalidGraph(what + ": expected [x, y, z]");
  }
  for (const auto& c : j) {
    if (!c.is_number()) throw InvalidGraph(what + ": coordinates must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

VesselGraph graph_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("vessels") ||
      !doc["vessels"].is_array()) {
    throw InvalidGraph("graph spec needs a top-level \"vessels\" array");
  }
  std::vector<Vessel> vessels;
  for (const auto& jv : doc["vessels"]) {
    try {
      Vessel v;
      v.id = jv.at("id").get<int>();
      const std::string label = "vessel " + std::to_string(v.id);
      v.name = jv.value("name", std::string{});
      v.start = position_from_json(jv.at("start"), label + " start");
      v.end = position_from_json(jv.at("end"), label + " end");
      const int type = jv.at("region_type").get<int>();
      if (type < 0 || type > 2) throw InvalidGraph(label + ": region_type must be 0, 1 or 2");
      v.region_type = static_cast<RegionType>(type);
      v.speed_cm_s = jv.at("speed_cm_s").get<double>();
      v.successors = jv.at("successors").get<std::vector<int>>();
      v.is_heart = jv.at("is_heart").get<bool>();
      vessels.push_back(std::move(v));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidGraph(std::string("malformed vessel entry: ") + e.what());
    }
  }
  return VesselGraph(std::move(vessels));
}

VesselGraph load_graph_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidGraph("cannot open graph file " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidGraph("graph file " + path.string() + ": " + e.what());
  }
  return graph_from_json(doc);
}

nlohmann::json graph_to_json(const VesselGraph& graph) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Vessel& v : graph.vessels()) {
    arr.push_back({{"id", v.id},
                   {"name", v.name},
                   {"start", {v.start.x, v.start.y, v.start.z}},
                   {"end", {v.end.x, v.end.y, v.end.z}},
                   {"region_type", static_cast<int>(v.region_type)},
                   {"speed_cm_s", v.speed_cm_s},
                   {"successors", v.successors},
                   {"is_heart", v.is_heart}});
  }
  return {{"vessels", arr}};
}

Position3 vessel_centroid(const Vessel& vessel) {
  return (vessel.start + vessel.end) * 0.5;
}

int locate_vessel(const VesselGraph& graph, const Position3& p) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const Vessel& v : graph.vessels()) {
    const double d = point_segment_distance(p, v.start, v.end);
    if (d < best_d) {
      best_d = d;
      best = v.id;
    }
  }
  return best;
}

std::vector<HeartLoop> enumerate_heart_loops(const VesselGraph& graph,
                                             std::size_t max_loops) {
  std::vector<HeartLoop> loops;
  const int heart = graph.heart_id();
  std::vector<int> path{heart};
  std::vector<bool> on_path(graph.size(), false);
  on_path[static_cast<std::size_t>(heart)] = true;

  // Iterative DFS; each frame remembers which successor to try next.
  std::vector<std::size_t> next_child{0};
  while (!path.empty()) {
    const int u = path.back();
    const auto& succ = graph.vessel(u).successors;
    std::size_t& k = next_child.back();
    if (k >= succ.size()) {
      on_path[static_cast<std::size_t>(u)] = false;
      path.pop_back();
      next_child.pop_back();
      continue;
    }
    const int w = succ[k++];
    if (w == heart) {
      HeartLoop loop;
      loop.vessels = path;
      for (int id : path) loop.expected_time_s += graph.vessel(id).transit_time_s();
      loops.push_back(std::move(loop));
      if (loops.size() > max_loops) {
        throw InvalidGraph("more than " + std::to_string(max_loops) +
                           " loops through the heart");
      }
    } else if (!on_path[static_cast<std::size_t>(w)]) {
      on_path[static_cast<std::size_t>(w)] = true;
      path.push_back(w);
      next_child.push_back(0);
    }
  }
  return loops;
}

std::vector<MobilityTrace> simulate_mobility(const VesselGraph& graph,
                                             int device_count,
                                             double duration_s,
                                             std::uint64_t seed) {
  if (device_count < 0) throw ConfigMismatch("device_count must be >= 0");
  if (!(duration_s > 0.0)) throw ConfigMismatch("duration must be > 0");

  const auto steps = static_cast<std::size_t>(std::floor(duration_s + 1e-9));
  std::vector<MobilityTrace> traces;
  traces.reserve(static_cast<std::size_t>(device_count));

  for (int d = 0; d < device_count; ++d) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(d)));
    MobilityTrace trace;
    trace.device_id = d;
    trace.period_s = 1.0;
    trace.samples.reserve(steps + 1);
    trace.heart_entries_s.push_back(0.0);

    int vessel = graph.heart_id();
    double offset = 0.0;  // cm travelled along the current vessel
    double now = 0.0;

    auto record = [&](double t) {
      const Vessel& v = graph.vessel(vessel);
      const double frac = offset / v.length_cm();
      trace.samples.push_back({t, v.start + (v.end - v.start) * frac, vessel});
    };
    record(0.0);

    for (std::size_t k = 1; k <= steps; ++k) {
      const double target = static_cast<double>(k);
      while (now < target) {
        const Vessel& v = graph.vessel(vessel);
        const double left = (v.length_cm() - offset) / v.speed_cm_s;
        if (now + left > target) {
          offset += v.speed_cm_s * (target - now);
          now = target;
        } else {
          now += left;
          const auto& succ = v.successors;
          const int next = succ.size() == 1 ? succ.front() : succ[rng.index(succ.size())];
          if (graph.vessel(next).is_heart && !v.is_heart) {
            trace.heart_entries_s.push_back(now);
          }
          vessel = next;
          offset = 0.0;
        }
      }
      record(target);
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

MobilityTrace upsample_trace(const MobilityTrace& trace,
                             const UpsampleParams& params) {
  if (trace.samples.size() < 2) {
    throw EmptyTrace("trace of device " + std::to_string(trace.device_id) +
                     " has fewer than 2 samples");
  }
  if (params.factor < 1) throw ConfigMismatch("upsample factor must be >= 1");
  if (!(params.sigma_cm >= 0.0)) throw ConfigMismatch("upsample sigma must be >= 0");
  if (params.factor == 1) return trace;

  const int n = params.factor;
  Rng rng(params.seed);
  MobilityTrace out;
  out.device_id = trace.device_id;
  out.period_s = trace.period_s / n;
  out.heart_entries_s = trace.heart_entries_s;
  out.samples.reserve((trace.samples.size() - 1) * static_cast<std::size_t>(n) + 1);

  for (std::size_t k = 0; k + 1 < trace.samples.size(); ++k) {
    const TraceSample& a = trace.samples[k];
    const TraceSample& b = trace.samples[k + 1];
    out.samples.push_back(a);
    const Position3 nu = b.position - a.position;
    for (int i = 1; i < n; ++i) {
      const double frac = static_cast<double>(i) / n;
      Position3 p = a.position + nu * frac;
      if (params.sigma_cm > 0.0) {
        p.x += params.sigma_cm * rng.normal();
        p.y += params.sigma_cm * rng.normal();
        p.z += params.sigma_cm * rng.normal();
      }
      out.samples.push_back({a.time_s + (b.time_s - a.time_s) * frac, p, a.vessel_id});
    }
  }
  out.samples.push_back(trace.samples.back());
  return out;
}

void write_trace_csv(std::ostream& out, std::span<const MobilityTrace> traces) {
  out << "time_s,device_id,x_cm,y_cm,z_cm,vessel_id\n";
  out << std::fixed << std::setprecision(6);
  for (const MobilityTrace& t : traces) {
    for (const TraceSample& s : t.samples) {
      out << s.time_s << ',' << t.device_id << ',' << s.position.x << ','
          << s.position.y << ',' << s.position.z << ',' << s.vessel_id << '\n';
    }
  }
}

}  // namespace nanoflow::vasculature
