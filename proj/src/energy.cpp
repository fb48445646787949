#include "nanoflow/energy.hpp"

#include <algorithm>
#include <cmath>

#include "nanoflow/errors.hpp"

namespace nanoflow::energy {

namespace {

constexpr double kSnap = 1e-6;

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw ConfigError(std::string("energy.") + key, what);
}

}  // namespace

void EnergyConfig::validate() const {
  require(v_g_volts > 0.0, "v_g_volts", "must be > 0");
  require(delta_q_coulombs > 0.0, "delta_q_pc", "must be > 0");
  require(t_cycle_s > 0.0, "t_cycle_ms", "must be > 0");
  require(e_max_joules > 0.0, "e_max_pj", "must be > 0");
  require(turn_off_joules >= 0.0, "turn_off_pj", "must be >= 0");
  require(turn_off_joules < turn_on_joules, "turn_on_pj", "must exceed turn_off_pj");
  require(turn_on_joules <= e_max_joules, "turn_on_pj", "must not exceed e_max_pj");
  require(cost_tx_pulse_joules >= 0.0, "cost_tx_pulse_pj", "must be >= 0");
  require(cost_rx_pulse_joules >= 0.0, "cost_rx_pulse_pj", "must be >= 0");
  require(cost_sense_joules >= 0.0, "cost_sense_pj", "must be >= 0");
}

StoredEnergy StoredEnergy::from_joules(double joules, double e_max_joules) {
  return StoredEnergy(joules, e_max_joules - joules);
}

EnergyState initial_state(const EnergyConfig& cfg) {
  EnergyState s;
  s.energy = StoredEnergy::from_parts(0.0, cfg.e_max_joules);
  s.powered = cfg.unlimited;
  return s;
}

double capacitance(const EnergyConfig& cfg) {
  return 2.0 * cfg.e_max_joules / (cfg.v_g_volts * cfg.v_g_volts);
}

double cycle_time_constant(const EnergyConfig& cfg) {
  return cfg.v_g_volts * capacitance(cfg) / cfg.delta_q_coulombs;
}

std::int64_t cycle_index(const StoredEnergy& e, const EnergyConfig& cfg) {
  const double stored = e.joules();
  const double headroom = e.headroom_joules();
  if (!(stored >= 0.0) || !(headroom > 0.0)) {
    throw EnergyOutOfRange("stored energy must lie in [0, E_max)");
  }
  if (stored == 0.0) return 0;

  // With u = sqrt(2E / (C V_g^2)) = sqrt(E / E_max) the index is
  // -tau ln(1 - u). For a nearly full capacitor 1 - u is rebuilt from the
  // headroom h = E_max - E as (h / E_max) / (1 + u), avoiding cancellation.
  const double tau = cycle_time_constant(cfg);
  double log_w = 0.0;
  if (stored <= headroom) {
    log_w = std::log1p(-std::sqrt(stored / cfg.e_max_joules));
  } else {
    const double h = headroom / cfg.e_max_joules;
    const double u = std::sqrt(1.0 - h);
    log_w = std::log(h / (1.0 + u));
  }
  const double raw = -tau * log_w;
  const double nearest = std::round(raw);
  if (std::abs(raw - nearest) <= kSnap) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(raw));
}

std::int64_t cycle_index(double joules, const EnergyConfig& cfg) {
  return cycle_index(StoredEnergy::from_joules(joules, cfg.e_max_joules), cfg);
}

StoredEnergy energy_at_cycle(std::int64_t n, const EnergyConfig& cfg) {
  if (n <= 0) return StoredEnergy::from_parts(0.0, cfg.e_max_joules);
  const double x = static_cast<double>(n) / cycle_time_constant(cfg);
  const double w = std::exp(-x);
  const double charged = -std::expm1(-x);  // 1 - w
  const double stored = std::min(cfg.e_max_joules, cfg.e_max_joules * charged * charged);
  const double headroom = std::max(0.0, cfg.e_max_joules * w * (2.0 - w));
  return StoredEnergy::from_parts(stored, headroom);
}

namespace {

void apply_turn_on(EnergyState& s, const EnergyConfig& cfg) {
  if (!s.powered && s.energy.joules() >= cfg.turn_on_joules) s.powered = true;
}

}  // namespace

EnergyState advance_cycles(EnergyState state, std::int64_t cycles,
                           const EnergyConfig& cfg) {
  if (cfg.unlimited || cycles <= 0) return state;
  if (state.energy.headroom_joules() > 0.0) {
    // One step maps E to E(n + 1) with n = cycle_index(E); from then on the
    // state sits on the grid, so k steps land on E(n + k).
    const std::int64_t n = cycle_index(state.energy, cfg);
    state.energy = energy_at_cycle(n + cycles, cfg);
  }
  apply_turn_on(state, cfg);
  return state;
}

EnergyState advance_harvest(EnergyState state, double dt_s,
                            const EnergyConfig& cfg) {
  if (!(dt_s > 0.0)) return state;
  const double phase = state.cycle_phase_s + dt_s;
  const auto completed =
      static_cast<std::int64_t>(std::floor(phase / cfg.t_cycle_s + kSnap));
  state.cycle_phase_s =
      std::max(0.0, phase - static_cast<double>(completed) * cfg.t_cycle_s);
  return advance_cycles(state, completed, cfg);
}

std::optional<EnergyState> try_consume(const EnergyState& state,
                                       double cost_joules,
                                       const EnergyConfig& cfg) {
  if (cfg.unlimited) return state;
  if (!state.powered || state.energy.joules() < cost_joules) return std::nullopt;
  EnergyState next = state;
  if (cost_joules > 0.0) {
    next.energy.spend(cost_joules);
    if (next.energy.joules() <= cfg.turn_off_joules) next.powered = false;
  }
  return next;
}

}  // namespace nanoflow::energy
