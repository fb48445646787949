#include "nanoflow/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "nanoflow/csv_io.hpp"
#include "nanoflow/errors.hpp"
#include "nanoflow/event_queue.hpp"
#include "nanoflow/rng.hpp"

namespace nanoflow::simcore {

namespace {

constexpr double kIndexSlack = 1e-9;
constexpr double kPruneAge = 1e-3;

struct Device {
  const vasculature::MobilityTrace* trace = nullptr;
  energy::EnergyState energy;
  std::int64_t cycles_applied = 0;
  double last_reset_s = 0.0;
  int event_bit = 0;
  double last_response_s = -std::numeric_limits<double>::infinity();
  std::size_t edge_cursor = 0;
  double consumed_j = 0.0;
  Rng rng{0};
};

struct Transmission {
  std::uint64_t id = 0;
  double start_s = 0.0;
  double end_s = 0.0;
  double tx_dbm = 0.0;
  Position3 position;
  bool is_beacon = false;
  std::size_t anchor = 0;  // source (beacon) or destination (response)
  std::size_t device = 0;
  double rx_at_anchor_dbm = 0.0;
  double circulation_time_s = 0.0;
  int event_bit = 0;
};

class Engine {
 public:
  explicit Engine(const SimulationInput& in) : in_(in) {
    if (in_.anchors.empty()) throw ConfigMismatch("at least one anchor is required");
    if (in_.graph == nullptr) throw ConfigMismatch("simulation needs a vessel graph");
    devices_.resize(in_.traces.size());
    for (std::size_t d = 0; d < devices_.size(); ++d) {
      const auto& tr = in_.traces[d];
      if (tr.samples.empty() || tr.samples.back().time_s + kIndexSlack < in_.duration_s) {
        throw ConfigMismatch("trace of device " + std::to_string(d) +
                             " ends before the simulation duration");
      }
      auto& dev = devices_[d];
      dev.trace = &tr;
      dev.energy = energy::initial_state(in_.energy);
      dev.rng = Rng(derive_seed(in_.seed, d));
    }
    for (const auto& a : in_.anchors) {
      ranges_.push_back(channel::max_range_cm(a.tx_power_dbm, in_.channel));
    }
    beacon_airtime_ = channel::airtime_s(in_.protocol.beacon_bits, in_.channel);
    response_airtime_ = channel::airtime_s(in_.protocol.response_bits, in_.channel);
    result_.consumed_joules.assign(devices_.size(), 0.0);
  }

  SimulationResult run() {
    for (std::size_t a = 0; a < in_.anchors.size(); ++a) schedule_beacon(a, 0);
    if (in_.scenario.sense_rate_hz > 0.0) {
      for (std::size_t d = 0; d < devices_.size(); ++d) schedule_sense(d, 0);
    }
    if (in_.protocol.record_timeline) schedule_timeline(0);

    while (!queue_.empty()) {
      const SimEvent ev = queue_.pop();
      switch (ev.kind) {
        case EventKind::Beacon: on_beacon(ev); break;
        case EventKind::Sense: on_sense(ev); break;
        case EventKind::Reception: on_reception(ev); break;
        case EventKind::Timeline: on_timeline(ev); break;
      }
    }

    std::stable_sort(result_.records.begin(), result_.records.end(),
                     [](const RawRecord& a, const RawRecord& b) {
                       if (a.report_time_s != b.report_time_s)
                         return a.report_time_s < b.report_time_s;
                       return a.device_mac < b.device_mac;
                     });
    for (std::size_t d = 0; d < devices_.size(); ++d) {
      result_.consumed_joules[d] = devices_[d].consumed_j;
    }
    return std::move(result_);
  }

 private:
  void schedule_beacon(std::size_t a, std::uint64_t k) {
    const double t = static_cast<double>(k) * in_.anchors[a].beacon_interval_s;
    if (t <= in_.duration_s) queue_.push({t, EventKind::Beacon, a, k});
  }
  void schedule_sense(std::size_t d, std::uint64_t k) {
    const double t = static_cast<double>(k) / in_.scenario.sense_rate_hz;
    if (t <= in_.duration_s) queue_.push({t, EventKind::Sense, d, k});
  }
  void schedule_timeline(std::uint64_t k) {
    const double t = static_cast<double>(k);
    if (t <= in_.duration_s) queue_.push({t, EventKind::Timeline, 0, k});
  }

  std::size_t sample_index(const Device& dev, double t) const {
    const auto& s = dev.trace->samples;
    const double raw = std::floor(t / dev.trace->period_s + kIndexSlack);
    const auto idx = raw <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(raw);
    return std::min(idx, s.size() - 1);
  }

  bool in_heart(const vasculature::TraceSample& s) const {
    return in_.graph->vessel(s.vessel_id).is_heart;
  }

  /// Inserted trace points carry the vessel of the preceding base sample, so
  /// the heart region is judged by the nearest vessel as well.
  bool in_heart_region(const vasculature::TraceSample& s) const {
    return in_heart(s) || in_.graph->vessel(vasculature::locate_vessel(*in_.graph, s.position)).is_heart;
  }

  /// Brings harvesting and trace-driven resets up to time t.
  void touch(Device& dev, double t) {
    if (!in_.energy.unlimited) {
      const auto total =
          static_cast<std::int64_t>(std::floor(t / in_.energy.t_cycle_s + kIndexSlack));
      if (total > dev.cycles_applied) {
        dev.energy = energy::advance_cycles(dev.energy, total - dev.cycles_applied, in_.energy);
        dev.cycles_applied = total;
      }
    }
    if (in_.protocol.reset_policy == ResetPolicy::HeartPassage) {
      const auto& s = dev.trace->samples;
      const std::size_t idx = sample_index(dev, t);
      while (dev.edge_cursor < idx) {
        ++dev.edge_cursor;
        const auto& cur = s[dev.edge_cursor];
        if (in_heart(cur) && !in_heart(s[dev.edge_cursor - 1])) {
          dev.last_reset_s = cur.time_s;
          dev.event_bit = 0;
          ++result_.stats.resets;
        }
      }
    }
  }

  bool consume(Device& dev, double cost_j) {
    auto next = energy::try_consume(dev.energy, cost_j, in_.energy);
    if (!next) return false;
    dev.energy = *next;
    if (!in_.energy.unlimited) dev.consumed_j += cost_j;
    return true;
  }

  double pulse_cost(int bits, double per_pulse) const {
    return 0.5 * static_cast<double>(bits) * per_pulse;
  }

  void prune(double now) {
    std::erase_if(active_, [now](const Transmission& x) { return x.end_s < now - kPruneAge; });
  }

  void collect_interference(double start, double end, std::uint64_t skip_id,
                            const Position3& at, std::optional<std::size_t> anchor,
                            std::vector<double>& out) const {
    out.clear();
    for (const auto& x : active_) {
      if (x.id == skip_id) continue;
      if (!(x.start_s < end && x.end_s > start)) continue;
      if (anchor && !x.is_beacon && x.anchor == *anchor) {
        out.push_back(x.rx_at_anchor_dbm);
      } else {
        out.push_back(x.tx_dbm - channel::path_loss_db(distance(x.position, at), in_.channel));
      }
    }
  }

  void on_beacon(const SimEvent& ev) {
    const std::size_t a = ev.subject;
    const Anchor& anchor = in_.anchors[a];
    const double t = ev.time_s;
    schedule_beacon(a, ev.seq + 1);
    prune(t);
    ++result_.stats.beacons_sent;

    Transmission beacon;
    beacon.id = next_tx_id_++;
    beacon.start_s = t;
    beacon.end_s = t + beacon_airtime_;
    beacon.tx_dbm = anchor.tx_power_dbm;
    beacon.position = anchor.position;
    beacon.is_beacon = true;
    beacon.anchor = a;
    active_.push_back(beacon);

    const auto& ch = in_.channel;
    const auto& proto = in_.protocol;
    for (std::size_t d = 0; d < devices_.size(); ++d) {
      Device& dev = devices_[d];
      const std::size_t idx = sample_index(dev, t);
      const auto& sample = dev.trace->samples[idx];
      const double dist = distance(sample.position, anchor.position);
      if (dist > ranges_[a]) {
        ++result_.stats.beacons_below_sensitivity;
        continue;
      }
      touch(dev, t);

      double closing = 0.0;
      if (idx > 0) {
        const Position3 v = (sample.position - dev.trace->samples[idx - 1].position) *
                            (1.0 / dev.trace->period_s);
        if (dist > 0.0) closing = dot(v, (anchor.position - sample.position) * (1.0 / dist));
      }
      const double shift = channel::doppler_shift_hz(closing, ch.f_c_hz);
      result_.stats.max_doppler_shift_hz =
          std::max(result_.stats.max_doppler_shift_hz, std::abs(shift));
      const double rx = channel::received_power_dbm(
          anchor.tx_power_dbm,
          channel::path_loss_db(dist, ch) + channel::doppler_penalty_db(shift, ch));

      collect_interference(beacon.start_s, beacon.end_s, beacon.id, sample.position,
                           std::nullopt, scratch_);
      const double sinr = channel::sinr_db(rx, scratch_, ch.noise_floor_dbm);
      const auto decision = channel::reception_decision(rx, sinr, ch);
      if (decision == channel::Reception::DiscardSensitivity) {
        ++result_.stats.beacons_below_sensitivity;
        continue;
      }
      if (decision == channel::Reception::DiscardCollision) {
        ++result_.stats.beacons_collided;
        continue;
      }
      if (!consume(dev, pulse_cost(proto.beacon_bits, in_.energy.cost_rx_pulse_joules))) {
        ++result_.stats.beacons_ignored_off;
        continue;
      }
      ++result_.stats.beacons_delivered;

      if (t - dev.last_response_s + kIndexSlack < proto.report_holdoff_s) continue;
      const double start = beacon.end_s + dev.rng.uniform() * proto.response_window_s;
      const double end = start + response_airtime_;
      if (end > in_.duration_s) continue;
      if (!consume(dev, pulse_cost(proto.response_bits, in_.energy.cost_tx_pulse_joules))) {
        ++result_.stats.responses_skipped_energy;
        continue;
      }

      Transmission resp;
      resp.id = next_tx_id_++;
      resp.start_s = start;
      resp.end_s = end;
      resp.tx_dbm = response_tx_power_dbm(rx, anchor.tx_power_dbm, ch.tx_power_dbm, ch, proto);
      resp.position = sample.position;
      resp.anchor = a;
      resp.device = d;
      // Backscatter runs over the same link, so the anchor sees the response
      // attenuated by exactly the loss the beacon suffered.
      resp.rx_at_anchor_dbm = resp.tx_dbm - (anchor.tx_power_dbm - rx);
      resp.circulation_time_s = std::max(0.0, start - dev.last_reset_s);
      resp.event_bit = dev.event_bit;
      active_.push_back(resp);
      queue_.push({end, EventKind::Reception, resp.id, 0});
      ++result_.stats.responses_sent;
      // Holdoff counts from the beacon that was answered.
      dev.last_response_s = t;

      if (proto.reset_policy == ResetPolicy::BeaconContact && in_heart_region(sample)) {
        dev.last_reset_s = start;
        dev.event_bit = 0;
        ++result_.stats.resets;
      }
    }
  }

  void on_sense(const SimEvent& ev) {
    const std::size_t d = ev.subject;
    const double t = ev.time_s;
    schedule_sense(d, ev.seq + 1);
    Device& dev = devices_[d];
    touch(dev, t);
    if (!dev.energy.powered) return;
    if (!consume(dev, in_.energy.cost_sense_joules)) return;
    ++result_.stats.sense_ticks;
    const auto& sample = dev.trace->samples[sample_index(dev, t)];
    if (distance(sample.position, in_.scenario.target) < in_.scenario.detection_radius_cm) {
      dev.event_bit = 1;
      ++result_.stats.detections;
    }
  }

  void on_reception(const SimEvent& ev) {
    const auto it = std::find_if(active_.begin(), active_.end(),
                                 [&](const Transmission& x) { return x.id == ev.subject; });
    if (it == active_.end()) return;
    const Transmission resp = *it;
    const Anchor& anchor = in_.anchors[resp.anchor];
    collect_interference(resp.start_s, resp.end_s, resp.id, anchor.position, resp.anchor,
                         scratch_);
    const double sinr = channel::sinr_db(resp.rx_at_anchor_dbm, scratch_,
                                         in_.channel.noise_floor_dbm);
    switch (channel::reception_decision(resp.rx_at_anchor_dbm, sinr, in_.channel)) {
      case channel::Reception::DiscardSensitivity:
        ++result_.stats.responses_below_sensitivity;
        return;
      case channel::Reception::DiscardCollision:
        ++result_.stats.responses_collided;
        return;
      case channel::Reception::Delivered:
        break;
    }
    ++result_.stats.responses_delivered;
    result_.records.push_back({resp.end_s, static_cast<std::uint16_t>(resp.device),
                               resp.circulation_time_s, resp.event_bit});
  }

  void on_timeline(const SimEvent& ev) {
    const double t = ev.time_s;
    schedule_timeline(ev.seq + 1);
    for (std::size_t d = 0; d < devices_.size(); ++d) {
      Device& dev = devices_[d];
      touch(dev, t);
      result_.timeline.push_back({t, static_cast<std::uint16_t>(d),
                                  dev.energy.energy.joules() * 1e12, dev.energy.powered});
    }
  }

  const SimulationInput& in_;
  std::vector<Device> devices_;
  std::vector<double> ranges_;
  double beacon_airtime_ = 0.0;
  double response_airtime_ = 0.0;
  SimEventQueue queue_;
  std::vector<Transmission> active_;
  std::vector<double> scratch_;
  std::uint64_t next_tx_id_ = 0;
  SimulationResult result_;
};

}  // namespace

double response_tx_power_dbm(double beacon_rx_dbm, double anchor_tx_dbm, double tx_cap_dbm,
                             const channel::ChannelConfig& ch, const ProtocolConfig& proto) {
  const double link_loss = anchor_tx_dbm - beacon_rx_dbm;
  return std::min(tx_cap_dbm, ch.rx_sensitivity_dbm + proto.link_margin_db + link_loss);
}

SimulationResult run_simulation(const SimulationInput& input) {
  return Engine(input).run();
}

void write_raw_csv(std::ostream& out, std::span<const RawRecord> records) {
  out << "report_time_s,device_mac,circulation_time_s,event_bit\n";
  for (const auto& r : records) {
    out << csv::fixed6(r.report_time_s) << ',' << r.device_mac << ','
        << csv::fixed6(r.circulation_time_s) << ',' << r.event_bit << '\n';
  }
}

void write_raw_csv(const std::filesystem::path& path, std::span<const RawRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_raw_csv(out, records);
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<RawRecord> read_raw_csv(std::istream& in) {
  const auto table = csv::read_table(in, {"report_time_s", "device_mac",
                                          "circulation_time_s", "event_bit"});
  std::vector<RawRecord> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    RawRecord r;
    r.report_time_s = csv::parse_double(row[0], i + 2);
    const auto mac = csv::parse_int(row[1], i + 2);
    if (mac < 0 || mac > 0xFFFF) throw ExternalDataError("MAC out of range on line " + std::to_string(i + 2));
    r.device_mac = static_cast<std::uint16_t>(mac);
    r.circulation_time_s = csv::parse_double(row[2], i + 2);
    const auto bit = csv::parse_int(row[3], i + 2);
    if (bit != 0 && bit != 1) throw ExternalDataError("event_bit must be 0 or 1 on line " + std::to_string(i + 2));
    r.event_bit = static_cast<int>(bit);
    out.push_back(r);
  }
  return out;
}

std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_raw_csv(in);
}

void write_energy_csv(std::ostream& out, std::span<const EnergySample> samples) {
  out << "time_s,device_mac,energy_pj,powered\n";
  for (const auto& s : samples) {
    out << csv::fixed6(s.time_s) << ',' << s.device_mac << ',' << csv::fixed6(s.energy_pj)
        << ',' << (s.powered ? 1 : 0) << '\n';
  }
}

}  // namespace nanoflow::simcore
