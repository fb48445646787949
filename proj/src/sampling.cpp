#include "nanoflow/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

#include "nanoflow/csv_io.hpp"
#include "nanoflow/errors.hpp"
#include "nanoflow/rng.hpp"

namespace nanoflow::benchmark {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::SRS: return "SRS";
    case Strategy::SSRS: return "SSRS";
    case Strategy::CRS: return "CRS";
    case Strategy::RGS: return "RGS";
    case Strategy::SCS: return "SCS";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Strategy s : kAllStrategies) {
    if (up == to_string(s)) return s;
  }
  return std::nullopt;
}

Strategy recommended_strategy(std::optional<vasculature::RegionType> focus) {
  if (!focus) return Strategy::RGS;
  switch (*focus) {
    case vasculature::RegionType::ArterialFast: return Strategy::RGS;
    case vasculature::RegionType::Venous: return Strategy::SSRS;
    case vasculature::RegionType::Transition: return Strategy::SRS;
  }
  return Strategy::RGS;
}

std::vector<std::size_t> apportion(std::span<const std::size_t> counts, std::size_t k) {
  const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  std::vector<std::size_t> out(counts.size(), 0);
  if (total == 0) return out;
  std::vector<std::pair<std::size_t, std::size_t>> rem;  // (remainder numerator, index)
  std::size_t given = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::size_t num = counts[i] * k;
    out[i] = num / total;
    given += out[i];
    rem.emplace_back(num % total, i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; given < k && j < rem.size(); ++j, ++given) ++out[rem[j].second];
  return out;
}

std::vector<TargetEvent> build_dense_set(const vasculature::VesselGraph& graph,
                                         std::size_t count) {
  const auto vessels = graph.vessels();
  const std::size_t n = vessels.size();
  if (count < n) throw SampleTooLarge("dense set needs at least one point per vessel");

  // One point per vessel, then the rest by length with largest remainders.
  std::vector<double> lengths(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += (lengths[i] = vessels[i].length_cm());
  const std::size_t extra = count - n;
  std::vector<std::size_t> per(n, 1);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t given = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = static_cast<double>(extra) * lengths[i] / total;
    const auto whole = static_cast<std::size_t>(std::floor(share));
    per[i] += whole;
    given += whole;
    rem.emplace_back(share - static_cast<double>(whole), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; given < extra; ++j, ++given) ++per[rem[j % n].second];

  std::vector<TargetEvent> out;
  out.reserve(count);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = vessels[i];
    for (std::size_t j = 0; j < per[i]; ++j) {
      const double f = (static_cast<double>(j) + 0.5) / static_cast<double>(per[i]);
      TargetEvent e;
      e.id = static_cast<int>(out.size());
      e.position = v.start + (v.end - v.start) * f;
      e.region_id = vasculature::locate_vessel(graph, e.position);
      e.region_type = graph.vessel(e.region_id).region_type;
      out.push_back(e);
    }
  }
  return out;
}

namespace {

std::vector<std::size_t> srs_indices(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.index(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

struct Box {
  Position3 lo;
  Position3 hi;
};

Box bounds_of(std::span<const TargetEvent> pts) {
  Box b{pts[0].position, pts[0].position};
  for (const auto& p : pts) {
    b.lo = {std::min(b.lo.x, p.position.x), std::min(b.lo.y, p.position.y),
            std::min(b.lo.z, p.position.z)};
    b.hi = {std::max(b.hi.x, p.position.x), std::max(b.hi.y, p.position.y),
            std::max(b.hi.z, p.position.z)};
  }
  return b;
}

using Cell = std::array<std::int64_t, 3>;

Cell cell_of(const Position3& p, const Position3& lo, double pitch) {
  return {static_cast<std::int64_t>(std::floor((p.x - lo.x) / pitch)),
          static_cast<std::int64_t>(std::floor((p.y - lo.y) / pitch)),
          static_cast<std::int64_t>(std::floor((p.z - lo.z) / pitch))};
}

/// Cells keyed z-major so iteration order is z, then y, then x.
std::map<Cell, std::vector<std::size_t>> grid(std::span<const TargetEvent> pts, const Box& b,
                                              double pitch) {
  std::map<Cell, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Cell c = cell_of(pts[i].position, b.lo, pitch);
    cells[{c[2], c[1], c[0]}].push_back(i);
  }
  return cells;
}

std::vector<std::size_t> rgs(std::span<const TargetEvent> pts, std::size_t k) {
  const Box b = bounds_of(pts);
  const Position3 ext = b.hi - b.lo;
  double hi = 2.0 * std::max({ext.x, ext.y, ext.z, 1e-9});
  double lo = hi;
  while (grid(pts, b, lo).size() < k) {
    lo *= 0.5;
    if (lo < 1e-12) break;
  }
  // Bisect towards the coarsest pitch that still fills k cells.
  for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (grid(pts, b, mid).size() >= k ? lo : hi) = mid;
  }
  const auto cells = grid(pts, b, lo);
  std::vector<std::size_t> out;
  for (const auto& [key, members] : cells) {
    const Position3 center{b.lo.x + (static_cast<double>(key[2]) + 0.5) * lo,
                           b.lo.y + (static_cast<double>(key[1]) + 0.5) * lo,
                           b.lo.z + (static_cast<double>(key[0]) + 0.5) * lo};
    std::size_t best = members[0];
    double best_d = distance(pts[best].position, center);
    for (std::size_t m : members) {
      const double d = distance(pts[m].position, center);
      if (d < best_d) {
        best = m;
        best_d = d;
      }
    }
    out.push_back(best);
    if (out.size() == k) break;
  }
  return out;
}

void scs_split(std::span<const TargetEvent> pts, const std::vector<std::size_t>& members, Box box,
               std::size_t k, Rng& rng, std::vector<std::size_t>& out) {
  if (members.empty()) return;
  if (k == 1) {
    out.push_back(members[rng.index(members.size())]);
    return;
  }
  const Position3 ext = box.hi - box.lo;
  int axis = 0;
  if (ext.y > ext.x) axis = 1;
  if (ext.z > (axis == 0 ? ext.x : ext.y)) axis = 2;
  auto coord = [axis](const Position3& p) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; };
  auto set_coord = [axis](Position3& p, double v) { (axis == 0 ? p.x : axis == 1 ? p.y : p.z) = v; };

  const std::size_t k1 = k / 2;
  const double cut = coord(box.lo) + (coord(box.hi) - coord(box.lo)) *
                                         static_cast<double>(k1) / static_cast<double>(k);
  std::vector<std::size_t> left, right;
  for (std::size_t m : members) (coord(pts[m].position) < cut ? left : right).push_back(m);
  Box lb = box, rb = box;
  set_coord(lb.hi, cut);
  set_coord(rb.lo, cut);
  scs_split(pts, left, lb, k1, rng, out);
  scs_split(pts, right, rb, k - k1, rng, out);
}

std::vector<std::size_t> scs(std::span<const TargetEvent> pts, std::size_t k, Rng& rng) {
  Box box = bounds_of(pts);
  // Make the top faces inclusive.
  box.hi = box.hi + Position3{1e-9, 1e-9, 1e-9};
  std::vector<std::size_t> all(pts.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> out;
  scs_split(pts, all, box, k, rng, out);
  if (out.size() < k) {
    // Empty blocks leave a shortfall; fill it from the unpicked points.
    std::vector<bool> taken(pts.size(), false);
    for (std::size_t i : out) taken[i] = true;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!taken[i]) rest.push_back(i);
    for (std::size_t j : srs_indices(rest.size(), k - out.size(), rng)) out.push_back(rest[j]);
  }
  return out;
}

}  // namespace

std::vector<TargetEvent> sample_locations(std::span<const TargetEvent> dense, Strategy strategy,
                                          std::size_t k, std::uint64_t seed) {
  const std::size_t n = dense.size();
  if (k < 1 || k > n) {
    throw SampleTooLarge("sample size " + std::to_string(k) + " outside [1, " +
                         std::to_string(n) + "]");
  }
  Rng rng(seed);
  std::vector<std::size_t> picked;
  switch (strategy) {
    case Strategy::SRS:
      picked = srs_indices(n, k, rng);
      break;
    case Strategy::SSRS: {
      std::array<std::vector<std::size_t>, 3> strata;
      for (std::size_t i = 0; i < n; ++i)
        strata[static_cast<std::size_t>(dense[i].region_type)].push_back(i);
      const std::array<std::size_t, 3> counts{strata[0].size(), strata[1].size(), strata[2].size()};
      const auto quota = apportion(counts, k);
      for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t j : srs_indices(strata[s].size(), quota[s], rng))
          picked.push_back(strata[s][j]);
      }
      break;
    }
    case Strategy::CRS: {
      std::map<int, std::vector<std::size_t>> clusters;
      for (std::size_t i = 0; i < n; ++i) clusters[dense[i].region_id].push_back(i);
      std::vector<const std::vector<std::size_t>*> order;
      for (const auto& [id, members] : clusters) order.push_back(&members);
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        std::swap(order[i], order[i + rng.index(order.size() - i)]);
      }
      for (const auto* c : order) {
        if (picked.size() >= k) break;
        picked.insert(picked.end(), c->begin(), c->end());
      }
      std::sort(picked.begin(), picked.end(),
                [&](std::size_t a, std::size_t b) { return dense[a].id < dense[b].id; });
      picked.resize(k);
      break;
    }
    case Strategy::RGS:
      if (k == n) {
        picked.resize(n);
        std::iota(picked.begin(), picked.end(), std::size_t{0});
      } else {
        picked = rgs(dense, k);
      }
      break;
    case Strategy::SCS:
      picked = scs(dense, k, rng);
      break;
  }
  std::vector<TargetEvent> out;
  out.reserve(picked.size());
  for (std::size_t i : picked) out.push_back(dense[i]);
  return out;
}

std::vector<CurvePoint> convergence_curve(std::span<const EventOutcome> dense_results,
                                          Strategy strategy, std::vector<std::size_t> sizes,
                                          std::uint64_t seed,
                                          const vasculature::VesselGraph& graph,
                                          bool correct_only) {
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  std::vector<TargetEvent> dense;
  std::map<int, const RegionEstimate*> estimate_of;
  for (const auto& r : dense_results) {
    dense.push_back(r.truth);
    estimate_of[r.truth.id] = &r.estimate;
  }
  std::vector<CurvePoint> curve;
  for (std::size_t k : sizes) {
    auto sample = sample_locations(dense, strategy, k, derive_seed(seed, k));
    // Id order, so a full sample sums exactly like the dense set.
    std::sort(sample.begin(), sample.end(),
              [](const TargetEvent& a, const TargetEvent& b) { return a.id < b.id; });
    std::vector<RegionEstimate> est;
    est.reserve(sample.size());
    for (const auto& t : sample) est.push_back(*estimate_of.at(t.id));
    const auto s = summarize(est, sample, graph);
    curve.push_back({k, s.region_accuracy, s.mean_point_error_cm(correct_only), s.reliability});
  }
  return curve;
}

void write_events_csv(std::ostream& out, std::span<const TargetEvent> events) {
  out << "event_id,x_cm,y_cm,z_cm,region_id,region_type\n";
  for (const auto& e : events) {
    out << e.id << ',' << csv::fixed6(e.position.x) << ',' << csv::fixed6(e.position.y) << ','
        << csv::fixed6(e.position.z) << ',' << e.region_id << ','
        << static_cast<int>(e.region_type) << '\n';
  }
}

std::vector<TargetEvent> read_events_csv(std::istream& in) {
  const auto table =
      csv::read_table(in, {"event_id", "x_cm", "y_cm", "z_cm", "region_id", "region_type"});
  std::vector<TargetEvent> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = i + 2;
    TargetEvent e;
    e.id = static_cast<int>(csv::parse_int(row[0], line));
    e.position = {csv::parse_double(row[1], line), csv::parse_double(row[2], line),
                  csv::parse_double(row[3], line)};
    e.region_id = static_cast<int>(csv::parse_int(row[4], line));
    const auto type = csv::parse_int(row[5], line);
    if (type < 0 || type > 2) throw ExternalDataError("bad region_type on line " + std::to_string(line));
    e.region_type = static_cast<vasculature::RegionType>(type);
    out.push_back(e);
  }
  return out;
}

void write_outcomes_csv(std::ostream& out, std::span<const EventOutcome> outcomes) {
  out << "event_id,x_cm,y_cm,z_cm,region_id,region_type,estimated_region,est_x_cm,est_y_cm,"
         "est_z_cm\n";
  for (const auto& o : outcomes) {
    const auto& e = o.truth;
    out << e.id << ',' << csv::fixed6(e.position.x) << ',' << csv::fixed6(e.position.y) << ','
        << csv::fixed6(e.position.z) << ',' << e.region_id << ','
        << static_cast<int>(e.region_type) << ',';
    if (o.estimate.estimated_region) out << *o.estimate.estimated_region;
    if (o.estimate.point) {
      const auto& p = *o.estimate.point;
      out << ',' << csv::fixed6(p.x) << ',' << csv::fixed6(p.y) << ',' << csv::fixed6(p.z);
    } else {
      out << ",,,";
    }
    out << '\n';
  }
}

std::vector<EventOutcome> read_outcomes_csv(std::istream& in) {
  const auto table = csv::read_table(
      in, {"event_id", "x_cm", "y_cm", "z_cm", "region_id", "region_type", "estimated_region",
           "est_x_cm", "est_y_cm", "est_z_cm"});
  std::vector<EventOutcome> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const std::size_t line = i + 2;
    EventOutcome o;
    o.truth.id = static_cast<int>(csv::parse_int(row[0], line));
    o.truth.position = {csv::parse_double(row[1], line), csv::parse_double(row[2], line),
                        csv::parse_double(row[3], line)};
    o.truth.region_id = static_cast<int>(csv::parse_int(row[4], line));
    const auto type = csv::parse_int(row[5], line);
    if (type < 0 || type > 2) throw ExternalDataError("bad region_type on line " + std::to_string(line));
    o.truth.region_type = static_cast<vasculature::RegionType>(type);
    o.estimate.event_id = o.truth.id;
    if (!row[6].empty()) o.estimate.estimated_region = static_cast<int>(csv::parse_int(row[6], line));
    if (!row[7].empty() || !row[8].empty() || !row[9].empty()) {
      o.estimate.point = Position3{csv::parse_double(row[7], line), csv::parse_double(row[8], line),
                                   csv::parse_double(row[9], line)};
    }
    out.push_back(o);
  }
  return out;
}

}  // namespace nanoflow::benchmark
