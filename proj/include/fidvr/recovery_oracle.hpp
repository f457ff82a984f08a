#pragma once

#include <optional>

#include "fidvr/network.hpp"

namespace fidvr {

/// Reference integrator for the thermal-disconnection phase. Integrates
///
///   df_th/dt = (theta2 - (theta2 - theta1) * f_th - V_i(f_th)^2 * g_stall_m)
///              / (T_th * (theta2 - theta1))
///
/// by RK4, re-solving the network for V_i(f_th) inside every stage, and
/// returns the time for f_th to fall from `f_th_initial` to 0. The mean-slope
/// closed form (estimate_t2) is an approximation of this value.
///
/// Unlike the measurement-side estimators this needs the full network
/// description; it exists as a cross-check oracle, not as part of the
/// monitoring chain. std::nullopt = the initial slope is non-negative
/// (non-recovering).
[[nodiscard]] std::optional<double> integrate_fth_ode(const NetworkSpec& net,
                                                      const CompositeLoadSpec& load,
                                                      double v_pre_guess,
                                                      double f_th_initial = 1.0,
                                                      double dt = 1e-3, double t_max = 600.0);

}  // namespace fidvr
