#include "fidvr/load_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fidvr/errors.hpp"

namespace fidvr {

namespace {

void check_fraction(const char* name, double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError(std::string("load.") + name,
                              "must lie in [0,1], got " + std::to_string(value));
    }
}

}  // namespace

void ThermalRelayParams::validate() const {
    if (!(theta1 > 0.0)) throw ValidationError("relay.theta1", "must be > 0");
    if (!(theta2 > theta1)) throw ValidationError("relay.theta2", "must exceed theta1");
    if (!(t_th > 0.0)) throw ValidationError("relay.t_th", "must be > 0");
}

void CompositeLoadSpec::validate() const {
    if (!(p_load_nom > 0.0)) throw ValidationError("load.p_load_nom", "must be > 0");
    check_fraction("f_mA", f_mA);
    check_fraction("f_mB", f_mB);
    check_fraction("f_mC", f_mC);
    check_fraction("f_elec", f_elec);
    check_fraction("f_st", f_st);
    check_fraction("f_mD", f_mD);
    const double frac_sum = f_abce() + f_st + f_mD;
    if (std::abs(frac_sum - 1.0) > 1e-12) {
        throw ValidationError("load.fractions",
                              "composition fractions sum to " + std::to_string(frac_sum) +
                                  ", must equal 1");
    }
    check_fraction("f_stZ", f_stZ);
    check_fraction("f_stI", f_stI);
    check_fraction("f_stP", f_stP);
    const double zip_sum = f_stZ + f_stI + f_stP;
    if (std::abs(zip_sum - 1.0) > 1e-12) {
        throw ValidationError("load.zip_shares", "ZIP shares sum to " + std::to_string(zip_sum) +
                                                     ", must equal 1");
    }
    if (!(q_over_p_abce >= 0.0)) throw ValidationError("load.q_over_p_abce", "must be >= 0");
    if (!(q_over_p_stat >= 0.0)) throw ValidationError("load.q_over_p_stat", "must be >= 0");
    if (!(q_over_p_mD_running >= 0.0))
        throw ValidationError("load.q_over_p_mD_running", "must be >= 0");
    if (!(g_stall_m > 0.0)) throw ValidationError("load.g_stall_m", "must be > 0");
    if (!(b_stall_m >= 0.0)) throw ValidationError("load.b_stall_m", "must be >= 0");
    relay.validate();
    if (!(v_stall_threshold > 0.0)) throw ValidationError("load.v_stall_threshold", "must be > 0");
    if (!(t_stall_dwell >= 0.0)) throw ValidationError("load.t_stall_dwell", "must be >= 0");
}

double thermal_power(double v_i, const CompositeLoadSpec& spec) {
    return v_i * v_i * spec.g_stall_m;
}

double fth_from_theta(double theta, const ThermalRelayParams& params) {
    const double raw = (params.theta2 - theta) / (params.theta2 - params.theta1);
    return std::clamp(raw, 0.0, 1.0);
}

double theta_from_fth(double f_th, const ThermalRelayParams& params) {
    return (params.theta2 - params.theta1) * (1.0 - f_th) + params.theta1;
}

namespace {

/// ZIP weight applied to a nominal power to get the conductance (or
/// susceptance) contribution: f_stZ + f_stI/V + f_stP/V^2.
double zip_admittance_weight(double v, const CompositeLoadSpec& spec) {
    return spec.f_stZ + spec.f_stI / v + spec.f_stP / (v * v);
}

Admittance abce_admittance_unchecked(double v, const CompositeLoadSpec& spec) {
    const double p_abce = spec.f_abce() * spec.p_load_nom;
    const double g = p_abce / (v * v);
    return Admittance::from_load(g, spec.q_over_p_abce * g);
}

Admittance static_admittance_unchecked(double v, const CompositeLoadSpec& spec) {
    const double p_st = spec.f_st * spec.p_load_nom;
    const double g = p_st * zip_admittance_weight(v, spec);
    return Admittance::from_load(g, spec.q_over_p_stat * g);
}

Admittance abces_admittance_unchecked(double v, const CompositeLoadSpec& spec) {
    return abce_admittance_unchecked(v, spec) + static_admittance_unchecked(v, spec);
}

Admittance motor_d_admittance_unchecked(const ThermalRelayState& state,
                                        const CompositeLoadSpec& spec, double gamma_c,
                                        double v) {
    const double p_md = spec.f_mD * spec.p_load_nom;
    if (state.mode == MotorMode::running) {
        const double g = p_md / (v * v);
        const double b = spec.q_over_p_mD_running * p_md / (v * v);
        return Admittance::from_load(g, b);
    }
    // Stalled stock: fixed motor-base admittance scaled onto the system base
    // by the motor base power, then by the connected fractions.
    const double scale = gamma_c * state.f_th * p_md;
    return Admittance::from_load(scale * spec.g_stall_m, scale * spec.b_stall_m);
}

}  // namespace

Admittance abces_admittance(double v_mag, const CompositeLoadSpec& spec) {
    if (!(v_mag > kVoltageFloor)) {
        throw DegenerateVoltageError("abces_admittance: voltage " + std::to_string(v_mag) +
                                     " pu at or below floor " + std::to_string(kVoltageFloor));
    }
    return abces_admittance_unchecked(v_mag, spec);
}

Admittance motor_d_admittance(const ThermalRelayState& state, const CompositeLoadSpec& spec,
                              double gamma_c, double v_mag) {
    if (state.mode == MotorMode::running && !(v_mag > kVoltageFloor)) {
        throw DegenerateVoltageError("motor_d_admittance: voltage " + std::to_string(v_mag) +
                                     " pu at or below floor " + std::to_string(kVoltageFloor));
    }
    return motor_d_admittance_unchecked(state, spec, gamma_c, v_mag);
}

LoadComponents load_components(double v_mag, const CompositeLoadSpec& spec,
                               const ThermalRelayState& state, double gamma_c) {
    const double v = std::max(v_mag, kVoltageFloor);
    return {abce_admittance_unchecked(v, spec), static_admittance_unchecked(v, spec),
            motor_d_admittance_unchecked(state, spec, gamma_c, v)};
}

Admittance total_load_admittance(double v_mag, const CompositeLoadSpec& spec,
                                 const ThermalRelayState& state, double gamma_c) {
    return load_components(v_mag, spec, state, gamma_c).total();
}

ThermalRelayState relay_step(const ThermalRelayState& state, double v_i, double dt,
                             const CompositeLoadSpec& spec) {
    if (state.mode == MotorMode::running) return state;
    const double p_th = thermal_power(v_i, spec);
    const double t_th = spec.relay.t_th;
    const auto rate = [&](double theta) { return (p_th - theta) / t_th; };

    const double k1 = rate(state.theta);
    const double k2 = rate(state.theta + 0.5 * dt * k1);
    const double k3 = rate(state.theta + 0.5 * dt * k2);
    const double k4 = rate(state.theta + dt * k3);

    ThermalRelayState next = state;
    next.theta = state.theta + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    next.f_th = fth_from_theta(next.theta, spec.relay);
    return next;
}

}  // namespace fidvr
