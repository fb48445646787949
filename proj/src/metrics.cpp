#include "nanoflow/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "nanoflow/errors.hpp"

namespace nanoflow::benchmark {

namespace {

/// For each truth, the matching estimate or nullptr.
std::vector<const RegionEstimate*> match(std::span<const RegionEstimate> estimates,
                                         std::span<const TargetEvent> truths) {
  if (truths.empty()) throw MismatchedSets("truth set is empty");
  std::unordered_map<int, std::size_t> slot;
  slot.reserve(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) {
    if (!slot.emplace(truths[i].id, i).second) {
      throw MismatchedSets("duplicate truth event id " + std::to_string(truths[i].id));
    }
  }
  std::vector<const RegionEstimate*> out(truths.size(), nullptr);
  for (const auto& e : estimates) {
    const auto it = slot.find(e.event_id);
    if (it == slot.end()) {
      throw MismatchedSets("estimate for unknown event id " + std::to_string(e.event_id));
    }
    if (out[it->second] != nullptr) {
      throw MismatchedSets("duplicate estimate for event id " + std::to_string(e.event_id));
    }
    out[it->second] = &e;
  }
  return out;
}

bool is_correct(const RegionEstimate* e, const TargetEvent& t) {
  return e != nullptr && e->estimated_region && *e->estimated_region == t.region_id;
}

nlohmann::json errors_json(const std::vector<double>& v) {
  return nlohmann::json(v);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

RegionEstimate with_centroid(RegionEstimate e, const vasculature::VesselGraph& graph) {
  if (!e.point && e.estimated_region) {
    e.point = vasculature::vessel_centroid(graph.vessel(*e.estimated_region));
  }
  return e;
}

double region_accuracy(std::span<const RegionEstimate> estimates,
                       std::span<const TargetEvent> truths) {
  const auto m = match(estimates, truths);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) correct += is_correct(m[i], truths[i]);
  return static_cast<double>(correct) / static_cast<double>(truths.size());
}

double point_error(const RegionEstimate& estimate, const TargetEvent& truth) {
  if (!estimate.point) throw NoEstimate("event " + std::to_string(estimate.event_id) + " has no point estimate");
  return distance(*estimate.point, truth.position);
}

double point_error(const RegionEstimate& estimate, const TargetEvent& truth,
                   const vasculature::VesselGraph& graph) {
  return point_error(with_centroid(estimate, graph), truth);
}

double reliability(std::span<const RegionEstimate> estimates,
                   std::span<const TargetEvent> truths) {
  const auto m = match(estimates, truths);
  std::size_t with = 0;
  for (const auto* e : m) with += (e != nullptr && e->has_estimate());
  return static_cast<double>(with) / static_cast<double>(truths.size());
}

double MetricsSummary::mean_point_error_cm(bool correct_only) const {
  return mean_of(correct_only ? point_errors_correct_cm : point_errors_cm);
}

nlohmann::json MetricsSummary::to_json(bool correct_only) const {
  nlohmann::json j;
  j["region_accuracy"] = region_accuracy;
  j["n_correct"] = n_correct;
  j["n_total"] = n_total;
  j["reliability"] = reliability;
  j["point_errors_cm"] = errors_json(correct_only ? point_errors_correct_cm : point_errors_cm);
  j["point_errors_correct_cm"] = errors_json(point_errors_correct_cm);
  const double mean = mean_point_error_cm(correct_only);
  j["mean_point_error_cm"] = std::isnan(mean) ? nlohmann::json(nullptr) : nlohmann::json(mean);
  return j;
}

nlohmann::json EnergySummary::to_json() const {
  return {{"devices", devices},
          {"mean_consumed_pj", mean_consumed_pj},
          {"max_consumed_pj", max_consumed_pj}};
}

std::string format_seconds_key(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j = overall.to_json(point_errors_correct_only);
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [type, s] : by_region_type) {
    types[std::to_string(type)] = s.to_json(point_errors_correct_only);
  }
  j["by_region_type"] = types;
  nlohmann::json times = nlohmann::json::object();
  for (const auto& [t, s] : by_sim_time_s) {
    times[format_seconds_key(t)] = s.to_json(point_errors_correct_only);
  }
  j["by_sim_time_s"] = times;
  j["energy_summary"] = energy.to_json();
  j["failed_runs"] = failed_runs;
  j["config_fingerprint"] = config_fingerprint;
  return j;
}

MetricsSummary summarize(std::span<const RegionEstimate> estimates,
                         std::span<const TargetEvent> truths,
                         const vasculature::VesselGraph& graph) {
  const auto m = match(estimates, truths);
  MetricsSummary s;
  s.n_total = truths.size();
  std::size_t with = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const RegionEstimate* e = m[i];
    if (e == nullptr || !e->has_estimate()) continue;
    ++with;
    const bool ok = is_correct(e, truths[i]);
    s.n_correct += ok;
    const double err = point_error(*e, truths[i], graph);
    s.point_errors_cm.push_back(err);
    if (ok) s.point_errors_correct_cm.push_back(err);
  }
  s.region_accuracy = static_cast<double>(s.n_correct) / static_cast<double>(s.n_total);
  s.reliability = static_cast<double>(with) / static_cast<double>(s.n_total);
  return s;
}

MetricsReport compute_metrics(std::span<const RegionEstimate> estimates,
                              std::span<const TargetEvent> truths,
                              const vasculature::VesselGraph& graph) {
  MetricsReport r;
  r.overall = summarize(estimates, truths, graph);
  const auto m = match(estimates, truths);
  for (int type = 0; type <= 2; ++type) {
    std::vector<TargetEvent> sub_truths;
    std::vector<RegionEstimate> sub_est;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      if (static_cast<int>(truths[i].region_type) != type) continue;
      sub_truths.push_back(truths[i]);
      if (m[i] != nullptr) sub_est.push_back(*m[i]);
    }
    if (sub_truths.empty()) {
      r.by_region_type[type] = MetricsSummary{};
    } else {
      r.by_region_type[type] = summarize(sub_est, sub_truths, graph);
    }
  }
  return r;
}

}  // namespace nanoflow::benchmark
