#pragma once

/**
 * @file energy.hpp
 * @brief Capacitor-based energy harvesting with intermittent ON/OFF lifecycle.
 *
 * A nanowire generator of voltage V_g delivers charge ΔQ per harvesting
 * cycle of length t_cycle into a capacitor C = 2 E_max / V_g^2. Energy after
 * n cycles from empty is E(n) = (C V_g^2 / 2) (1 - exp(-ΔQ n / (V_g C)))^2;
 * the inverse recovers the cycle index from a stored energy.
 */

#include <cstdint>
#include <optional>

namespace nanoflow::energy {

struct EnergyConfig {
  double v_g_volts = 0.42;
  double delta_q_coulombs = 6e-12;
  double t_cycle_s = 0.02;
  double e_max_joules = 800e-12;
  double turn_on_joules = 10e-12;
  double turn_off_joules = 0.0;
  double cost_tx_pulse_joules = 1e-12;
  double cost_rx_pulse_joules = 0.0;
  double cost_sense_joules = 1e-12;
  /// Device never runs out: always powered, consumption is free.
  bool unlimited = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Stored energy together with its headroom to E_max.
///
/// Close to saturation E_max - E is far below the resolution of E itself, so
/// the headroom is carried separately. Both values are exact to rounding
/// whichever end of the range the capacitor is at.
class StoredEnergy {
 public:
  StoredEnergy() = default;
  /// From a plain joule value; headroom is derived as e_max - joules.
  static StoredEnergy from_joules(double joules, double e_max_joules);
  static StoredEnergy from_parts(double joules, double headroom_joules) {
    return StoredEnergy(joules, headroom_joules);
  }

  double joules() const { return stored_; }
  double headroom_joules() const { return headroom_; }

  /// Removes energy. Caller guarantees cost <= joules().
  void spend(double cost_joules) {
    stored_ -= cost_joules;
    headroom_ += cost_joules;
  }

  friend bool operator==(const StoredEnergy&, const StoredEnergy&) = default;

 private:
  StoredEnergy(double stored, double headroom)
      : stored_(stored), headroom_(headroom) {}
  double stored_ = 0.0;
  double headroom_ = 0.0;
};

struct EnergyState {
  StoredEnergy energy;
  bool powered = false;
  double cycle_phase_s = 0.0;

  friend bool operator==(const EnergyState&, const EnergyState&) = default;
};

/// Empty capacitor, device off (or on, for unlimited configs).
EnergyState initial_state(const EnergyConfig& cfg);

/// C_cap = 2 E_max / V_g^2, in farads.
double capacitance(const EnergyConfig& cfg);

/// Harvesting cycles per e-fold of the charging exponential, V_g C / ΔQ.
double cycle_time_constant(const EnergyConfig& cfg);

/// Cycle index n for a stored energy. Throws EnergyOutOfRange for E < 0 or
/// E >= E_max. Indices within 1e-6 of an integer are snapped to it before
/// the ceiling is applied so grid energies map back to their own index.
std::int64_t cycle_index(const StoredEnergy& e, const EnergyConfig& cfg);
std::int64_t cycle_index(double joules, const EnergyConfig& cfg);

/// Energy after n cycles from empty, clamped to E_max.
StoredEnergy energy_at_cycle(std::int64_t n, const EnergyConfig& cfg);

/// Applies `cycles` completed harvesting cycles.
EnergyState advance_cycles(EnergyState state, std::int64_t cycles,
                           const EnergyConfig& cfg);

/// Accumulates dt into the cycle phase and harvests every completed cycle.
EnergyState advance_harvest(EnergyState state, double dt_s,
                            const EnergyConfig& cfg);

/// Spends cost if the device is on and holds at least cost. Returns nullopt
/// (Insufficient) otherwise, leaving the caller's state untouched.
std::optional<EnergyState> try_consume(const EnergyState& state,
                                       double cost_joules,
                                       const EnergyConfig& cfg);

}  // namespace nanoflow::energy
