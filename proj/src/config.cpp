#include "nanoflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "nanoflow/errors.hpp"

namespace nanoflow {

namespace {

using nlohmann::json;

/// Reads keys from one object and remembers which were seen.
class Section {
 public:
  Section(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::string key(const std::string& k) const { return prefix_.empty() ? k : prefix_ + "." + k; }

  const json* find(const std::string& k) {
    seen_.insert(k);
    const auto it = obj_.find(k);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& k, double& out) {
    if (const json* v = find(k)) {
      if (!v->is_number()) throw ConfigError(key(k), "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) throw ConfigError(key(k), "must be finite");
    }
  }
  /// Numeric key whose value is stored scaled (e.g. pJ -> J).
  void scaled(const std::string& k, double& out, double scale) {
    if (obj_.contains(k)) {
      double v = 0.0;
      number(k, v);
      out = v * scale;
    } else {
      seen_.insert(k);
    }
  }
  template <typename Int>
  void integer(const std::string& k, Int& out) {
    if (const json* v = find(k)) {
      if (!v->is_number_integer()) throw ConfigError(key(k), "expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->is_number_unsigned() || v->get<std::int64_t>() >= 0) {
          out = static_cast<Int>(v->get<std::uint64_t>());
          return;
        }
        throw ConfigError(key(k), "must be non-negative");
      } else {
        out = static_cast<Int>(v->get<std::int64_t>());
      }
    }
  }
  void boolean(const std::string& k, bool& out) {
    if (const json* v = find(k)) {
      if (!v->is_boolean()) throw ConfigError(key(k), "expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const std::string& k, std::string& out) {
    if (const json* v = find(k)) {
      if (!v->is_string()) throw ConfigError(key(k), "expected a string");
      out = v->get<std::string>();
    }
  }
  void position(const std::string& k, Position3& out) {
    if (const json* v = find(k)) out = parse_position(*v, key(k));
  }
  const json* object(const std::string& k) {
    const json* v = find(k);
    if (v != nullptr && !v->is_object()) throw ConfigError(key(k), "expected an object");
    return v;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

  static Position3 parse_position(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() ||
        !v[2].is_number()) {
      throw ConfigError(where, "expected [x, y, z] in cm");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }

 private:
  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

json position_json(const Position3& p) { return json::array({p.x, p.y, p.z}); }

const char* policy_name(simcore::ResetPolicy p) {
  return p == simcore::ResetPolicy::BeaconContact ? "beacon_contact" : "heart_passage";
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig c;
  Section root(doc, "");
  root.integer("seed", c.seed);
  root.number("duration_s", c.duration_s);
  root.integer("device_count", c.device_count);

  if (const json* v = root.object("vasculature")) {
    Section s(*v, "vasculature");
    s.string("graph", c.graph);
    s.integer("upsample_factor", c.upsample_factor);
    s.number("upsample_sigma_cm", c.upsample_sigma_cm);
    s.finish();
  }

  if (const json* v = root.object("energy")) {
    Section s(*v, "energy");
    auto& e = c.energy;
    s.number("v_g_volts", e.v_g_volts);
    s.scaled("delta_q_pc", e.delta_q_coulombs, 1e-12);
    s.scaled("t_cycle_ms", e.t_cycle_s, 1e-3);
    s.scaled("e_max_pj", e.e_max_joules, 1e-12);
    s.scaled("turn_on_pj", e.turn_on_joules, 1e-12);
    s.scaled("turn_off_pj", e.turn_off_joules, 1e-12);
    s.scaled("cost_tx_pulse_pj", e.cost_tx_pulse_joules, 1e-12);
    s.scaled("cost_rx_pulse_pj", e.cost_rx_pulse_joules, 1e-12);
    s.scaled("cost_sense_pj", e.cost_sense_joules, 1e-12);
    s.boolean("unlimited", e.unlimited);
    s.finish();
  }

  if (const json* v = root.object("channel")) {
    Section s(*v, "channel");
    auto& ch = c.channel;
    s.scaled("f_c_thz", ch.f_c_hz, 1e12);
    s.scaled("bandwidth_ghz", ch.bandwidth_hz, 1e9);
    s.number("tx_power_dbm", ch.tx_power_dbm);
    s.number("rx_sensitivity_dbm", ch.rx_sensitivity_dbm);
    s.number("sinr_threshold_db", ch.sinr_threshold_db);
    if (const json* nf = s.find("noise_floor_dbm")) {
      if (nf->is_null()) {
        ch.noise_floor_dbm = -std::numeric_limits<double>::infinity();
      } else if (nf->is_number()) {
        ch.noise_floor_dbm = nf->get<double>();
      } else {
        throw ConfigError("channel.noise_floor_dbm", "expected a number or null");
      }
    }
    s.number("spreading_exponent", ch.spreading_exponent);
    s.number("doppler_penalty_db_per_mhz", ch.doppler_penalty_db_per_mhz);
    s.number("spectral_efficiency", ch.spectral_efficiency);
    if (const json* layers = s.find("layers")) {
      if (!layers->is_array()) throw ConfigError("channel.layers", "expected an array");
      ch.layers.clear();
      for (std::size_t i = 0; i < layers->size(); ++i) {
        Section l((*layers)[i], "channel.layers[" + std::to_string(i) + "]");
        channel::Layer layer;
        l.string("name", layer.name);
        l.number("atten_db_per_cm", layer.atten_db_per_cm);
        l.number("thickness_cm", layer.thickness_cm);
        l.finish();
        ch.layers.push_back(layer);
      }
    }
    s.finish();
  }

  const double default_anchor_tx = c.channel.tx_power_dbm;
  for (auto& a : c.anchors) a.tx_power_dbm = default_anchor_tx;

  if (const json* v = root.object("simcore")) {
    Section s(*v, "simcore");
    auto& p = c.protocol;
    if (const json* anchors = s.find("anchors")) {
      if (!anchors->is_array() || anchors->empty())
        throw ConfigError("simcore.anchors", "expected a non-empty array");
      c.anchors.clear();
      for (std::size_t i = 0; i < anchors->size(); ++i) {
        Section a((*anchors)[i], "simcore.anchors[" + std::to_string(i) + "]");
        simcore::Anchor anchor;
        anchor.mac = static_cast<std::uint16_t>(0xA000 + i);
        anchor.tx_power_dbm = default_anchor_tx;
        int mac = anchor.mac;
        a.integer("mac", mac);
        if (mac < 0 || mac > 0xFFFF) throw ConfigError(a.key("mac"), "must fit in 16 bits");
        anchor.mac = static_cast<std::uint16_t>(mac);
        a.position("position", anchor.position);
        a.number("beacon_interval_s", anchor.beacon_interval_s);
        a.number("tx_power_dbm", anchor.tx_power_dbm);
        a.finish();
        c.anchors.push_back(anchor);
      }
    }
    s.integer("beacon_bits", p.beacon_bits);
    s.integer("response_bits", p.response_bits);
    s.scaled("response_window_ns", p.response_window_s, 1e-9);
    s.number("report_holdoff_s", p.report_holdoff_s);
    s.number("link_margin_db", p.link_margin_db);
    std::string policy = policy_name(p.reset_policy);
    s.string("reset_policy", policy);
    if (policy == "beacon_contact") {
      p.reset_policy = simcore::ResetPolicy::BeaconContact;
    } else if (policy == "heart_passage") {
      p.reset_policy = simcore::ResetPolicy::HeartPassage;
    } else {
      throw ConfigError("simcore.reset_policy", "expected beacon_contact or heart_passage");
    }
    s.finish();
  }

  if (const json* v = root.object("scenario")) {
    Section s(*v, "scenario");
    s.position("target", c.target);
    s.number("detection_radius_cm", c.detection_radius_cm);
    s.number("sense_rate_hz", c.sense_rate_hz);
    s.finish();
  }

  if (const json* v = root.object("benchmark")) {
    Section s(*v, "benchmark");
    s.integer("dense_count", c.dense_count);
    std::string strategy(benchmark::to_string(c.strategy));
    s.string("strategy", strategy);
    const auto parsed = benchmark::parse_strategy(strategy);
    if (!parsed) throw ConfigError("benchmark.strategy", "unknown strategy '" + strategy + "'");
    c.strategy = *parsed;
    s.integer("k", c.k);
    if (const json* t = s.find("sim_times_s")) {
      if (!t->is_array()) throw ConfigError("benchmark.sim_times_s", "expected an array");
      c.sim_times_s.clear();
      for (const auto& x : *t) {
        if (!x.is_number()) throw ConfigError("benchmark.sim_times_s", "expected numbers");
        c.sim_times_s.push_back(x.get<double>());
      }
    }
    if (const json* t = s.find("convergence_sizes")) {
      if (!t->is_array()) throw ConfigError("benchmark.convergence_sizes", "expected an array");
      c.convergence_sizes.clear();
      for (const auto& x : *t) {
        if (!x.is_number_integer() || x.get<std::int64_t>() < 1)
          throw ConfigError("benchmark.convergence_sizes", "expected positive integers");
        c.convergence_sizes.push_back(x.get<std::size_t>());
      }
    }
    s.boolean("point_errors_correct_only", c.point_errors_correct_only);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

void RunConfig::validate() const {
  if (!(duration_s > 0.0)) throw ConfigError("duration_s", "must be > 0");
  if (device_count < 0) throw ConfigError("device_count", "must be >= 0");
  if (upsample_factor < 1) throw ConfigError("vasculature.upsample_factor", "must be >= 1");
  if (!(upsample_sigma_cm >= 0.0)) throw ConfigError("vasculature.upsample_sigma_cm", "must be >= 0");
  energy.validate();
  channel.validate();
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const std::string key = "simcore.anchors[" + std::to_string(i) + "]";
    if (!(anchors[i].beacon_interval_s > 0.0)) throw ConfigError(key + ".beacon_interval_s", "must be > 0");
    if (!is_finite(anchors[i].position)) throw ConfigError(key + ".position", "must be finite");
  }
  if (protocol.beacon_bits < 1) throw ConfigError("simcore.beacon_bits", "must be >= 1");
  if (protocol.response_bits < 1) throw ConfigError("simcore.response_bits", "must be >= 1");
  if (!(protocol.response_window_s >= 0.0)) throw ConfigError("simcore.response_window_ns", "must be >= 0");
  if (!(protocol.report_holdoff_s >= 0.0)) throw ConfigError("simcore.report_holdoff_s", "must be >= 0");
  if (!is_finite(target)) throw ConfigError("scenario.target", "must be finite");
  if (!(detection_radius_cm > 0.0)) throw ConfigError("scenario.detection_radius_cm", "must be > 0");
  if (!(sense_rate_hz >= 1.0)) throw ConfigError("scenario.sense_rate_hz", "must be >= 1");
  if (dense_count < 1) throw ConfigError("benchmark.dense_count", "must be >= 1");
  if (k < 1) throw ConfigError("benchmark.k", "must be >= 1");
  for (double t : sim_times_s) {
    if (!(t > 0.0)) throw ConfigError("benchmark.sim_times_s", "times must be > 0");
  }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return from_json(doc);
}

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["duration_s"] = duration_s;
  j["device_count"] = device_count;
  j["vasculature"] = {{"graph", graph},
                      {"upsample_factor", upsample_factor},
                      {"upsample_sigma_cm", upsample_sigma_cm}};
  j["energy"] = {{"v_g_volts", energy.v_g_volts},
                 {"delta_q_pc", energy.delta_q_coulombs / 1e-12},
                 {"t_cycle_ms", energy.t_cycle_s / 1e-3},
                 {"e_max_pj", energy.e_max_joules / 1e-12},
                 {"turn_on_pj", energy.turn_on_joules / 1e-12},
                 {"turn_off_pj", energy.turn_off_joules / 1e-12},
                 {"cost_tx_pulse_pj", energy.cost_tx_pulse_joules / 1e-12},
                 {"cost_rx_pulse_pj", energy.cost_rx_pulse_joules / 1e-12},
                 {"cost_sense_pj", energy.cost_sense_joules / 1e-12},
                 {"unlimited", energy.unlimited}};
  json layers = json::array();
  for (const auto& l : channel.layers) {
    layers.push_back({{"name", l.name},
                      {"atten_db_per_cm", l.atten_db_per_cm},
                      {"thickness_cm", l.thickness_cm}});
  }
  j["channel"] = {{"f_c_thz", channel.f_c_hz / 1e12},
                  {"bandwidth_ghz", channel.bandwidth_hz / 1e9},
                  {"tx_power_dbm", channel.tx_power_dbm},
                  {"rx_sensitivity_dbm", channel.rx_sensitivity_dbm},
                  {"sinr_threshold_db", channel.sinr_threshold_db},
                  {"noise_floor_dbm", std::isfinite(channel.noise_floor_dbm)
                                          ? json(channel.noise_floor_dbm)
                                          : json(nullptr)},
                  {"layers", layers},
                  {"spreading_exponent", channel.spreading_exponent},
                  {"doppler_penalty_db_per_mhz", channel.doppler_penalty_db_per_mhz},
                  {"spectral_efficiency", channel.spectral_efficiency}};
  json anchor_list = json::array();
  for (const auto& a : anchors) {
    anchor_list.push_back({{"mac", a.mac},
                           {"position", position_json(a.position)},
                           {"beacon_interval_s", a.beacon_interval_s},
                           {"tx_power_dbm", a.tx_power_dbm}});
  }
  j["simcore"] = {{"anchors", anchor_list},
                  {"beacon_bits", protocol.beacon_bits},
                  {"response_bits", protocol.response_bits},
                  {"response_window_ns", protocol.response_window_s / 1e-9},
                  {"report_holdoff_s", protocol.report_holdoff_s},
                  {"link_margin_db", protocol.link_margin_db},
                  {"reset_policy", policy_name(protocol.reset_policy)}};
  j["scenario"] = {{"target", position_json(target)},
                   {"detection_radius_cm", detection_radius_cm},
                   {"sense_rate_hz", sense_rate_hz}};
  j["benchmark"] = {{"dense_count", dense_count},
                    {"strategy", std::string(benchmark::to_string(strategy))},
                    {"k", k},
                    {"sim_times_s", sim_times_s},
                    {"convergence_sizes", convergence_sizes},
                    {"point_errors_correct_only", point_errors_correct_only}};
  return j;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json().dump())));
  return buf;
}

vasculature::VesselGraph RunConfig::load_graph() const {
  if (graph == "default") return vasculature::build_reference_vasculature();
  try {
    return vasculature::load_graph_json(graph);
  } catch (const Error& e) {
    throw ConfigError("vasculature.graph", e.what());
  }
}

benchmark::ScenarioSettings RunConfig::scenario_settings() const {
  benchmark::ScenarioSettings s;
  s.device_count = device_count;
  s.duration_s = benchmark_duration_s();
  s.upsample = {upsample_factor, upsample_sigma_cm, seed};
  s.anchors = anchors;
  s.detection_radius_cm = detection_radius_cm;
  s.sense_rate_hz = sense_rate_hz;
  s.energy = energy;
  s.channel = channel;
  s.protocol = protocol;
  return s;
}

double RunConfig::benchmark_duration_s() const {
  double d = duration_s;
  for (double t : sim_times_s) d = std::max(d, t);
  return d;
}

}  // namespace nanoflow
