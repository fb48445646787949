#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "nanoflow/errors.hpp"
#include "nanoflow/event_queue.hpp"
#include "nanoflow/rng.hpp"
#include "nanoflow/simcore.hpp"
#include "toy_graphs.hpp"

using namespace nanoflow;
using namespace nanoflow::simcore;
using vasculature::MobilityTrace;

namespace {

// Device parked at p on vessel `vessel` for the whole run.
MobilityTrace parked(int id, Position3 p, int vessel, double duration) {
  MobilityTrace t;
  t.device_id = id;
  t.heart_entries_s = {0.0};
  for (int k = 0; k <= static_cast<int>(duration); ++k) t.samples.push_back({double(k), p, vessel});
  return t;
}

SimulationInput base_input(const vasculature::VesselGraph& g, std::span<const MobilityTrace> traces,
                           double duration) {
  SimulationInput in;
  in.graph = &g;
  in.traces = traces;
  in.anchors = {Anchor{}};
  in.duration_s = duration;
  in.seed = 7;
  in.energy.unlimited = true;
  in.scenario.target = {100, 100, 0};
  return in;
}

}  // namespace

TEST_CASE("event ordering breaks time ties by kind") {
  SimEventQueue q;
  q.push({1.0, EventKind::Timeline, 0, 0});
  q.push({1.0, EventKind::Sense, 3, 0});
  q.push({0.5, EventKind::Reception, 1, 0});
  q.push({1.0, EventKind::Beacon, 0, 0});
  q.push({1.0, EventKind::Sense, 1, 0});
  std::vector<std::pair<EventKind, std::size_t>> order;
  while (!q.empty()) {
    const auto e = q.pop();
    order.emplace_back(e.kind, e.subject);
  }
  const std::vector<std::pair<EventKind, std::size_t>> expect{
      {EventKind::Reception, 1}, {EventKind::Beacon, 0}, {EventKind::Sense, 1},
      {EventKind::Sense, 3}, {EventKind::Timeline, 0}};
  CHECK(order == expect);
}

TEST_CASE("response power lands at sensitivity plus margin") {
  const channel::ChannelConfig ch;
  const ProtocolConfig proto;
  // 60 dB link: reply needs -110 + 3 + 60 = -47 dBm.
  CHECK(response_tx_power_dbm(-80.0, -20.0, -20.0, ch, proto) == doctest::Approx(-47.0));
  // Very lossy link: capped.
  CHECK(response_tx_power_dbm(-108.0, -20.0, -20.0, ch, proto) == -20.0);
}

TEST_CASE("parked device in the heart reports every holdoff and resets") {
  const auto g = toy::ring();
  const std::vector<MobilityTrace> traces{parked(0, {0, 0, 0}, 0, 10)};
  auto in = base_input(g, traces, 10.0);
  const auto res = run_simulation(in);
  // Beacons at 0.0, 0.1, ..., 10.0; responses at 0, 2, 4, 6, 8; the reply
  // to the beacon at 10 s would end after the run.
  CHECK(res.stats.beacons_sent == 101);
  CHECK(res.stats.responses_sent == 5);
  CHECK(res.stats.resets == 5);
  REQUIRE(res.records.size() == 5);
  const double air_b = 16 / 5e9, air_r = 48 / 5e9;
  for (std::size_t i = 0; i < res.records.size(); ++i) {
    const auto& r = res.records[i];
    CHECK(r.device_mac == 0);
    CHECK(r.event_bit == 0);
    const double beacon_t = 2.0 * static_cast<double>(i);
    CHECK(r.report_time_s >= beacon_t + air_b + air_r);
    CHECK(r.report_time_s <= beacon_t + air_b + 100e-9 + air_r);
    if (i == 0) {
      CHECK(r.circulation_time_s < 1e-6);
    } else {
      CHECK(r.circulation_time_s == doctest::Approx(2.0).epsilon(1e-6));
    }
  }
  CHECK(std::is_sorted(res.records.begin(), res.records.end(), [](const auto& a, const auto& b) {
    return a.report_time_s < b.report_time_s;
  }));
  CHECK(res.consumed_joules == std::vector<double>{0.0});
  CHECK(res.timeline.size() == 11);
}

TEST_CASE("without a heart contact the circulation time keeps growing") {
  const auto g = toy::ring();
  const std::vector<MobilityTrace> traces{parked(0, {5, 1, 0}, 1, 10)};
  auto in = base_input(g, traces, 10.0);
  in.anchors[0].position = {5, 1, 0.5};
  const auto res = run_simulation(in);
  CHECK(res.stats.resets == 0);
  REQUIRE(res.records.size() == 5);
  for (const auto& r : res.records) {
    CHECK(r.circulation_time_s == doctest::Approx(r.report_time_s - 48 / 5e9).epsilon(1e-6));
  }
}

TEST_CASE("devices beyond range hear nothing") {
  const auto g = toy::ring();
  const std::vector<MobilityTrace> traces{parked(0, {5, 1, 0}, 1, 5), parked(1, {0, 0, 1.0}, 0, 5)};
  auto in = base_input(g, traces, 5.0);
  const auto res = run_simulation(in);
  // Device 1 sits 1 cm off the anchor, inside the 1.17 cm range.
  CHECK(res.stats.beacons_below_sensitivity == 51);
  CHECK(res.stats.beacons_delivered == 51);
  for (const auto& r : res.records) CHECK(r.device_mac == 1);
  CHECK(res.records.size() == 3);
}

TEST_CASE("sensing sets the event bit until the next reset") {
  const auto g = toy::ring();
  const std::vector<MobilityTrace> traces{parked(0, {0, 0, 0}, 0, 10)};
  auto in = base_input(g, traces, 10.0);
  in.scenario.target = {0, 0.5, 0};
  const auto res = run_simulation(in);
  CHECK(res.stats.sense_ticks == 31);
  CHECK(res.stats.detections == 31);
  REQUIRE(res.records.size() == 5);
  // Beacons win time ties, so the reply at t = 0 precedes the first sense.
  CHECK(res.records[0].event_bit == 0);
  for (std::size_t i = 1; i < res.records.size(); ++i) CHECK(res.records[i].event_bit == 1);

  in.scenario.detection_radius_cm = 0.5;  // strict comparison
  CHECK(run_simulation(in).stats.detections == 0);
}

TEST_CASE("heart passage policy resets on trace edges") {
  const auto g = toy::ring();
  MobilityTrace t;
  t.heart_entries_s = {0.0};
  // 0 0 1 1 0 2 3 0 0 1 0 : heart entries at samples 4, 7 and 10.
  const int path[] = {0, 0, 1, 1, 0, 2, 3, 0, 0, 1, 0};
  for (int k = 0; k < 11; ++k) t.samples.push_back({double(k), {50, 50, 0}, path[k]});
  const std::vector<MobilityTrace> traces{t};
  auto in = base_input(g, traces, 10.0);
  in.protocol.reset_policy = ResetPolicy::HeartPassage;
  in.scenario.sense_rate_hz = 0.0;
  auto res = run_simulation(in);
  CHECK(res.stats.resets == 3);
  CHECK(res.records.empty());

  in.protocol.reset_policy = ResetPolicy::BeaconContact;
  res = run_simulation(in);
  CHECK(res.stats.resets == 0);
}

TEST_CASE("simultaneous equal-power replies collide") {
  const auto g = toy::ring();
  const std::vector<MobilityTrace> traces{parked(0, {0, 0, 0.3}, 0, 4), parked(1, {0, 0, 0.3}, 0, 4)};
  auto in = base_input(g, traces, 4.0);
  in.protocol.response_window_s = 0.0;
  auto res = run_simulation(in);
  CHECK(res.stats.responses_sent == 4);
  CHECK(res.stats.responses_collided == 4);
  CHECK(res.records.empty());

  // A lower threshold lets both through: SINR is 0 dB for each.
  in.channel.sinr_threshold_db = -1.0;
  res = run_simulation(in);
  CHECK(res.stats.responses_delivered == 4);

  // With the random window most pairs no longer overlap.
  in = base_input(g, traces, 400.0);
  std::vector<MobilityTrace> long_traces{parked(0, {0, 0, 0.3}, 0, 400), parked(1, {0, 0, 0.3}, 0, 400)};
  in.traces = long_traces;
  res = run_simulation(in);
  CHECK(res.stats.responses_sent == 400);
  CHECK(res.stats.responses_delivered + res.stats.responses_collided == 400);
  // Overlap chance for 9.6 ns packets in a 100 ns window is about 18%.
  CHECK(res.stats.responses_collided > 30);
  CHECK(res.stats.responses_collided < 120);
}

TEST_CASE("harvested energy gates activity and is accounted exactly") {
  const auto g = toy::ring();
  const std::vector<MobilityTrace> traces{parked(0, {0, 0, 0}, 0, 200)};
  auto in = base_input(g, traces, 200.0);
  in.energy = energy::EnergyConfig{};
  in.scenario.target = {0, 0, 0};
  const auto res = run_simulation(in);
  CHECK(res.stats.responses_sent > 0);
  CHECK(res.stats.sense_ticks > 0);
  CHECK(res.stats.sense_ticks < 601);
  const double expect = 24e-12 * res.stats.responses_sent + 1e-12 * res.stats.sense_ticks;
  CHECK(res.consumed_joules[0] == doctest::Approx(expect).epsilon(1e-9));

  REQUIRE(res.timeline.size() == 201);
  for (const auto& s : res.timeline) {
    const auto n = static_cast<std::int64_t>(std::floor(s.time_s / 0.02 + 1e-9));
    CHECK(s.energy_pj >= 0.0);
    CHECK(s.energy_pj <= energy::energy_at_cycle(n, in.energy).joules() * 1e12 + 1e-9);
  }
  CHECK_FALSE(res.timeline.front().powered);
  CHECK(res.timeline.back().powered);
}

TEST_CASE("runs are reproducible and seed dependent") {
  const auto g = vasculature::build_reference_vasculature();
  auto base = vasculature::simulate_mobility(g, 32, 300.0, 2);
  for (auto& t : base) t = vasculature::upsample_trace(t, {3, 0.2, derive_seed(5, static_cast<std::uint64_t>(t.device_id))});
  SimulationInput in;
  in.graph = &g;
  in.traces = base;
  in.anchors = {Anchor{}};
  in.duration_s = 300.0;
  in.seed = 11;
  in.scenario.target = vasculature::vessel_centroid(g.vessel(30));
  const auto a = run_simulation(in);
  const auto b = run_simulation(in);
  CHECK(a.records == b.records);
  CHECK(a.timeline == b.timeline);
  CHECK(a.stats == b.stats);
  CHECK(!a.records.empty());
  CHECK(a.stats.max_doppler_shift_hz > 0.0);
  // Blood moves at most 20 cm/s; upsampling jitter can make apparent speeds larger.
  CHECK(a.stats.max_doppler_shift_hz < channel::doppler_shift_hz(200.0, 1e12));
  in.seed = 12;
  const auto c = run_simulation(in);
  CHECK(c.records != a.records);
}

TEST_CASE("simulation input validation") {
  const auto g = toy::ring();
  const std::vector<MobilityTrace> traces{parked(0, {0, 0, 0}, 0, 5)};
  auto in = base_input(g, traces, 6.0);
  CHECK_THROWS_AS(run_simulation(in), ConfigMismatch);
  in.duration_s = 5.0;
  in.anchors.clear();
  CHECK_THROWS_AS(run_simulation(in), ConfigMismatch);
}

TEST_CASE("raw csv golden, round trip and errors") {
  const std::vector<RawRecord> recs{{12.5, 3, 7.25, 1}, {13.0000004, 65535, 0.0, 0}};
  std::ostringstream os;
  write_raw_csv(os, recs);
  CHECK(os.str() ==
        "report_time_s,device_mac,circulation_time_s,event_bit\n"
        "12.500000,3,7.250000,1\n"
        "13.000000,65535,0.000000,0\n");
  std::istringstream is(os.str());
  const auto back = read_raw_csv(is);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == recs[0]);
  CHECK(back[1].report_time_s == 13.0);

  std::istringstream header_only("report_time_s,device_mac,circulation_time_s,event_bit\n");
  CHECK(read_raw_csv(header_only).empty());

  std::istringstream bad_header("time,mac,circ,bit\n1,2,3,0\n");
  CHECK_THROWS_AS(read_raw_csv(bad_header), ExternalDataError);
  std::istringstream bad_bit("report_time_s,device_mac,circulation_time_s,event_bit\n1,2,3,2\n");
  CHECK_THROWS_AS(read_raw_csv(bad_bit), ExternalDataError);
  std::istringstream ragged("report_time_s,device_mac,circulation_time_s,event_bit\n1,2,3\n");
  CHECK_THROWS_AS(read_raw_csv(ragged), ExternalDataError);
  std::istringstream bad_num("report_time_s,device_mac,circulation_time_s,event_bit\n1,x,3,0\n");
  CHECK_THROWS_AS(read_raw_csv(bad_num), ExternalDataError);
  CHECK_THROWS_AS(read_raw_csv(std::filesystem::path("/nonexistent/raw.csv")), IoError);
}

TEST_CASE("energy csv") {
  const std::vector<EnergySample> s{{1.0, 2, 12.3456789, true}, {2.0, 2, -0.0, false}};
  std::ostringstream os;
  write_energy_csv(os, s);
  CHECK(os.str() == "time_s,device_mac,energy_pj,powered\n1.000000,2,12.345679,1\n2.000000,2,0.000000,0\n");
}
