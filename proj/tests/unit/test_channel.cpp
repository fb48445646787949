#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "nanoflow/channel.hpp"
#include "nanoflow/errors.hpp"

using namespace nanoflow;
using namespace nanoflow::channel;

namespace {

double hand_spreading_db(double d_cm, double f_hz, double n) {
  const double pi = 3.14159265358979323846;
  return 20.0 * std::log10(4.0 * pi * f_hz / 299792458.0) + 10.0 * n * std::log10(d_cm / 100.0);
}

}  // namespace

TEST_CASE("layered path loss at the default layers") {
  const ChannelConfig cfg;
  CHECK(path_loss_db(3.0, cfg) ==
        doctest::Approx(hand_spreading_db(3.0, 1e12, 2.0) + 4.0 + 60.0 + 2.0).epsilon(1e-12));
  // Inside the first layer only part of it is crossed.
  CHECK(path_loss_db(0.05, cfg) ==
        doctest::Approx(std::max(0.0, hand_spreading_db(0.05, 1e12, 2.0)) + 2.0).epsilon(1e-12));
  CHECK(path_loss_db(1.0, cfg) ==
        doctest::Approx(hand_spreading_db(1.0, 1e12, 2.0) + 4.0 + 27.0).epsilon(1e-12));
}

TEST_CASE("zero distance has no spreading and no traversed layer") {
  const ChannelConfig cfg;
  CHECK(path_loss_db(0.0, cfg) == 0.0);
  ChannelConfig bare = cfg;
  bare.layers.clear();
  // Very short links would give a negative spreading term; it is floored.
  CHECK(path_loss_db(1e-6, bare) == 0.0);
}

TEST_CASE("doubling distance past the layers adds the log-law step") {
  for (double n : {2.0, 3.0}) {
    ChannelConfig cfg;
    cfg.spreading_exponent = n;
    const double step = path_loss_db(10.0, cfg) - path_loss_db(5.0, cfg);
    CHECK(step == doctest::Approx(6.0206 * n / 2.0).epsilon(1e-4));
  }
}

TEST_CASE("path loss is monotone and continuous") {
  const ChannelConfig cfg;
  double prev = path_loss_db(0.1, cfg);
  for (int i = 1001; i <= 50000; ++i) {
    const double d = i * 1e-4;
    const double pl = path_loss_db(d, cfg);
    REQUIRE(pl >= prev);
    // 1 um steps past the first millimetre.
    REQUIRE(pl - prev < 0.05);
    prev = pl;
  }
}

TEST_CASE("doppler shift") {
  CHECK(doppler_shift_hz(0.0, 1e12) == 0.0);
  CHECK(doppler_shift_hz(20.0, 1e12) == doctest::Approx(1e12 * 0.2 / 299792458.0));
  CHECK(std::abs(doppler_shift_hz(20.0, 1e12) - 667.0) < 1.0);
  CHECK(doppler_shift_hz(-20.0, 1e12) == -doppler_shift_hz(20.0, 1e12));
}

TEST_CASE("received power and sensitivity boundary") {
  const ChannelConfig cfg;
  CHECK(received_power_dbm(-20.0, 0.0) == -20.0);
  CHECK(received_power_dbm(-20.0, 90.0) == -110.0);
  CHECK(reception_decision(received_power_dbm(-20.0, 90.0), 100.0, cfg) == Reception::Delivered);
  CHECK(received_power_dbm(-20.0, 90.1) == doctest::Approx(-110.1));
  CHECK(reception_decision(received_power_dbm(-20.0, 90.1), 100.0, cfg) ==
        Reception::DiscardSensitivity);
}

TEST_CASE("sinr from milliwatt sums") {
  const std::vector<double> none;
  CHECK(sinr_db(-60.0, none, -90.0) == doctest::Approx(30.0).epsilon(1e-12));
  const std::vector<double> equal{-60.0};
  CHECK(sinr_db(-60.0, equal, -300.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sinr_db(-60.0, none, -std::numeric_limits<double>::infinity()) == kMaxSinrDb);
}

TEST_CASE("k identical interferers cost 10 log10 k") {
  const double one = sinr_db(-70.0, std::vector<double>{-75.0}, -400.0);
  for (int k = 2; k <= 16; ++k) {
    const std::vector<double> many(static_cast<std::size_t>(k), -75.0);
    CHECK(sinr_db(-70.0, many, -400.0) == doctest::Approx(one - 10.0 * std::log10(k)).epsilon(1e-9));
  }
}

TEST_CASE("reception decision order") {
  const ChannelConfig cfg;
  CHECK(reception_decision(-120.0, 50.0, cfg) == Reception::DiscardSensitivity);
  CHECK(reception_decision(-100.0, 2.0, cfg) == Reception::DiscardCollision);
  CHECK(reception_decision(-100.0, 30.0, cfg) == Reception::Delivered);
  // Sensitivity is judged before collisions.
  CHECK(reception_decision(-120.0, -50.0, cfg) == Reception::DiscardSensitivity);
  CHECK(reception_decision(-110.0, 10.0, cfg) == Reception::Delivered);
}

TEST_CASE("airtime and range") {
  const ChannelConfig cfg;
  CHECK(airtime_s(48, cfg) == doctest::Approx(9.6e-9));
  CHECK(airtime_s(16, cfg) == doctest::Approx(3.2e-9));
  const double r = max_range_cm(cfg.tx_power_dbm, cfg);
  CHECK(r > 1.0);
  CHECK(r < 2.0);
  CHECK(path_loss_db(r, cfg) <= cfg.tx_power_dbm - cfg.rx_sensitivity_dbm);
  CHECK(path_loss_db(r + 1e-6, cfg) > cfg.tx_power_dbm - cfg.rx_sensitivity_dbm);
  CHECK(doppler_penalty_db(1e6, cfg) == 0.0);
  ChannelConfig slope = cfg;
  slope.doppler_penalty_db_per_mhz = 2.0;
  CHECK(doppler_penalty_db(-0.5e6, slope) == doctest::Approx(1.0));
}

TEST_CASE("channel config validation") {
  ChannelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rx_sensitivity_dbm = cfg.tx_power_dbm;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = ChannelConfig{};
  cfg.layers[1].atten_db_per_cm = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
