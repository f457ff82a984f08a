#include "fidvr/recovery_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "fidvr/errors.hpp"

namespace fidvr {

std::optional<double> integrate_fth_ode(const NetworkSpec& net, const CompositeLoadSpec& load,
                                        double v_pre_guess, double f_th_initial, double dt,
                                        double t_max) {
    load.validate();
    const ThermalRelayParams& relay = load.relay;
    const double spread = relay.theta2 - relay.theta1;

    Complex guess{v_pre_guess, 0.0};
    const auto rate = [&](double f) {
        ThermalRelayState state;
        state.mode = MotorMode::stalled;
        state.f_th = std::clamp(f, 0.0, 1.0);
        state.theta = theta_from_fth(state.f_th, relay);
        guess = solve_internal_voltage(net, load, state, 1.0, guess).v_i;
        const double p_th = thermal_power(std::abs(guess), load);
        return (relay.theta2 - spread * f - p_th) / (relay.t_th * spread);
    };

    double f = f_th_initial;
    if (rate(f) >= 0.0) return std::nullopt;  // non-recovering

    double t = 0.0;
    while (t < t_max) {
        const double k1 = rate(f);
        const double k2 = rate(f + 0.5 * dt * k1);
        const double k3 = rate(f + 0.5 * dt * k2);
        const double k4 = rate(f + dt * k3);
        const double f_next = f + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (f_next <= 0.0) {
            // Linear interpolation of the crossing within the step.
            return t + dt * f / (f - f_next);
        }
        f = f_next;
        t += dt;
    }
    throw Error("integrate_fth_ode: disconnection incomplete after " + std::to_string(t_max) +
                " s");
}

}  // namespace fidvr
