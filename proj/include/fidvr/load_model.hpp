#pragma once

#include "fidvr/admittance.hpp"

namespace fidvr {

/// Below this internal-bus voltage the constant-power admittance branches are
/// evaluated at the floor instead (keeps 1/V^2 terms bounded while a fault is
/// on). Public operations treat voltages at or below the floor as degenerate.
inline constexpr double kVoltageFloor = 0.05;

/// Thermal relay tripping thresholds and time constant, in motor-base pu.
struct ThermalRelayParams {
    double theta1 = 0.9;  ///< temperature at which tripping starts
    double theta2 = 1.5;  ///< temperature at which tripping completes
    double t_th = 15.0;   ///< relay time constant [s]

    void validate() const;
};

enum class MotorMode { running, stalled };

/// Aggregate thermal-relay state of the stalled single-phase motor stock.
struct ThermalRelayState {
    double theta = 0.0;  ///< estimated motor temperature, motor-base pu
    double f_th = 1.0;   ///< fraction of stalled stock still connected
    MotorMode mode = MotorMode::running;
};

/// Composition and parameters of the admittance-simplified composite load.
///
/// Three-phase motors A/B/C and the electronic load are lumped as constant
/// power; the static load is a ZIP split; motor-D is the aggregate
/// single-phase induction motor that stalls into a fixed motor-base
/// admittance watched by the thermal relay.
struct CompositeLoadSpec {
    double p_load_nom = 1.0;  ///< active power at nominal voltage, system pu

    // composition fractions (sum to 1)
    double f_mA = 0.15;
    double f_mB = 0.05;
    double f_mC = 0.0;
    double f_elec = 0.15;
    double f_st = 0.35;
    double f_mD = 0.30;

    // static-load ZIP shares (sum to 1)
    double f_stZ = 0.4;
    double f_stI = 0.3;
    double f_stP = 0.3;

    // reactive ratios per component group
    double q_over_p_abce = 0.35;
    double q_over_p_stat = 0.20;
    double q_over_p_mD_running = 0.30;

    // stall admittance in motor-base pu
    double g_stall_m = 5.0;
    double b_stall_m = 5.0;

    ThermalRelayParams relay;

    double v_stall_threshold = 0.55;  ///< pu; stall trigger level
    double t_stall_dwell = 0.020;     ///< s the voltage must dwell below it

    [[nodiscard]] double f_abce() const { return f_mA + f_mB + f_mC + f_elec; }
    void validate() const;
};

/// Thermal power dissipated in one stalled motor at internal voltage v_i
/// (motor-base pu; independent of the connected fraction).
[[nodiscard]] double thermal_power(double v_i, const CompositeLoadSpec& spec);

/// Connected fraction commanded by the relay at temperature theta:
/// 1 below theta1, 0 above theta2, linear in between.
[[nodiscard]] double fth_from_theta(double theta, const ThermalRelayParams& params);

/// Inverse of fth_from_theta on [0,1].
[[nodiscard]] double theta_from_fth(double f_th, const ThermalRelayParams& params);

/// Voltage-dependent admittance of the A/B/C motors, electronic load and
/// static ZIP load, on system base. Throws DegenerateVoltageError at or
/// below the voltage floor.
[[nodiscard]] Admittance abces_admittance(double v_mag, const CompositeLoadSpec& spec);

/// Motor-D admittance on system base. Running stock is a constant-power
/// equivalent at the present voltage; stalled stock is the fixed stall
/// admittance scaled by the connected fraction f_th and the smart-thermostat
/// multiplier gamma_c.
[[nodiscard]] Admittance motor_d_admittance(const ThermalRelayState& state,
                                            const CompositeLoadSpec& spec, double gamma_c,
                                            double v_mag);

/// Component-wise admittances of the composite load, evaluated with the
/// voltage clamped at the floor. `abce` is the constant-power motor A/B/C +
/// electronic group, `st` the static ZIP share, `motor_d` the single-phase
/// motor stock.
struct LoadComponents {
    Admittance abce;
    Admittance st;
    Admittance motor_d;

    [[nodiscard]] Admittance total() const { return abce + st + motor_d; }
};

[[nodiscard]] LoadComponents load_components(double v_mag, const CompositeLoadSpec& spec,
                                             const ThermalRelayState& state, double gamma_c);

/// Total composite-load admittance at the internal bus. Voltages below the
/// floor are evaluated at the floor (fault-on behavior).
[[nodiscard]] Admittance total_load_admittance(double v_mag, const CompositeLoadSpec& spec,
                                               const ThermalRelayState& state, double gamma_c);

/// Advance the relay one step of d(theta)/dt = (P_th - theta) / T_th under a
/// voltage held constant over the step (classic RK4). Running mode is a
/// no-op; the relay only integrates while the motor is stalled.
[[nodiscard]] ThermalRelayState relay_step(const ThermalRelayState& state, double v_i,
                                           double dt, const CompositeLoadSpec& spec);

}  // namespace fidvr
