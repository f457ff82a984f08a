#include "fidvr/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "fidvr/errors.hpp"

namespace fidvr {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

/// Plateau window after stall onset used for the ground-truth delta-G.
constexpr double kPlateauStart = 0.5;
constexpr double kPlateauEnd = 1.5;

/// Guard band for the time extraction, as a fraction of the plateau rise.
constexpr double kExtractBand = 0.02;

}  // namespace

void OscillationSpec::validate() const {
    if (!(amplitude >= 0.0 && amplitude <= 0.1))
        throw ValidationError("oscillation.amplitude", "must lie in [0, 0.1]");
    if (!(frequency >= 0.0)) throw ValidationError("oscillation.frequency", "must be >= 0");
    if (!(damping >= 0.0)) throw ValidationError("oscillation.damping", "must be >= 0");
}

void ActuationSpec::validate() const {
    if (!(tau0 >= 0.0)) throw ValidationError("actuation.tau0", "must be >= 0");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ValidationError("actuation.gamma", "must lie in (0, 1]");
}

void ScenarioConfig::validate() const {
    net.validate();
    load.validate();
    if (!(dt_sim > 0.0)) throw ValidationError("dt_sim", "must be > 0");
    if (!(t_end > 0.0)) throw ValidationError("t_end", "must be > 0");
    if (!(pmu_rate > 0.0)) throw ValidationError("pmu_rate", "must be > 0");
    if (pmu_rate * dt_sim > 1.0 + 1e-9)
        throw ValidationError("pmu_rate", "needs pmu_rate * dt_sim <= 1");
    if (net.fault.duration > 0.0 && !(t_end > net.fault.t_apply + net.fault.duration))
        throw ValidationError("t_end", "must exceed the fault end");
    if (oscillation) oscillation->validate();
    if (actuation) actuation->validate();
    if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma", "must be >= 0");
}

double oscillation_factor(const OscillationSpec& spec, double dt_since_clear) {
    if (dt_since_clear < 0.0) return 1.0;
    return 1.0 + spec.amplitude * std::exp(-spec.damping * dt_since_clear) *
                     std::sin(kTwoPi * spec.frequency * dt_since_clear + spec.phase);
}

namespace {

Complex lerp(Complex a, Complex b, double lam) { return a + lam * (b - a); }

}  // namespace

TrajectoryRecord run_scenario(const ScenarioConfig& config) {
    config.validate();
    const double dt = config.dt_sim;
    const auto n_steps = static_cast<std::int64_t>(std::llround(config.t_end / dt));

    // Event instants are quantized to the step grid.
    const bool has_fault = config.net.fault.duration > 0.0;
    const std::int64_t k_apply =
        has_fault ? std::llround(config.net.fault.t_apply / dt) : -1;
    const std::int64_t k_clear =
        has_fault ? std::llround((config.net.fault.t_apply + config.net.fault.duration) / dt)
                  : -1;
    const double t_clear = has_fault ? static_cast<double>(k_clear) * dt : 0.0;
    const auto fault_on_step = [&](std::int64_t k) {
        return has_fault && k >= k_apply && k < k_clear;
    };
    const auto e_factor_at = [&](double time) {
        if (!config.oscillation || !has_fault || time < t_clear) return 1.0;
        return oscillation_factor(*config.oscillation, time - t_clear);
    };

    const std::int64_t dwell_steps_needed =
        std::max<std::int64_t>(1, static_cast<std::int64_t>(
                                      std::ceil(config.load.t_stall_dwell / dt - 1e-9)));

    TrajectoryRecord rec;
    const auto n_rows = static_cast<std::size_t>(n_steps) + 1;
    rec.t.reserve(n_rows);
    rec.v_i.reserve(n_rows);
    rec.v0.reserve(n_rows);
    rec.i.reserve(n_rows);
    rec.theta.reserve(n_rows);
    rec.f_th.reserve(n_rows);
    rec.gamma_c.reserve(n_rows);
    rec.g_load.reserve(n_rows);
    rec.b_load.reserve(n_rows);
    rec.g_abce.reserve(n_rows);
    rec.g_static.reserve(n_rows);
    rec.g_motor_d.reserve(n_rows);
    rec.e_applied.reserve(n_rows);
    rec.fault_on.reserve(n_rows);

    ThermalRelayState relay;
    double gamma_applied = 1.0;
    std::int64_t k_actuate = -1;
    std::int64_t dwell_steps = 0;
    Complex v{config.net.e_source, 0.0};

    const auto record_row = [&](std::int64_t k, bool f_on, double e_fac) {
        const LoadComponents comp =
            load_components(std::abs(v), config.load, relay, gamma_applied);
        const Admittance y_total = comp.total();
        const SubstationQuantities sub = substation_quantities(v, config.net, y_total);
        rec.t.push_back(static_cast<double>(k) * dt);
        rec.v_i.push_back(v);
        rec.v0.push_back(sub.v0);
        rec.i.push_back(sub.i);
        rec.theta.push_back(relay.theta);
        rec.f_th.push_back(relay.f_th);
        rec.gamma_c.push_back(gamma_applied);
        rec.g_load.push_back(y_total.g_load());
        rec.b_load.push_back(y_total.b_load());
        rec.g_abce.push_back(comp.abce.g_load());
        rec.g_static.push_back(comp.st.g_load());
        rec.g_motor_d.push_back(comp.motor_d.g_load());
        rec.e_applied.push_back(config.net.e_source * e_fac);
        rec.fault_on.push_back(f_on ? 1 : 0);
    };

    try {
        // Pre-fault steady state.
        v = solve_internal_voltage(config.net, config.load, relay, gamma_applied, v,
                                   fault_on_step(0), e_factor_at(0.0))
                .v_i;
        record_row(0, fault_on_step(0), e_factor_at(0.0));

        for (std::int64_t k = 0; k < n_steps; ++k) {
            const bool f_on = fault_on_step(k);  // held over the step
            const double t0 = static_cast<double>(k) * dt;
            const double t1 = static_cast<double>(k + 1) * dt;

            if (relay.mode == MotorMode::stalled) {
                // One RK4 step of the relay ODE; each stage re-solves the
                // algebraic network for the stage temperature.
                Complex guess = v;
                const auto theta_rate = [&](double theta, double stage_time) {
                    ThermalRelayState stage = relay;
                    stage.theta = theta;
                    stage.f_th = fth_from_theta(theta, config.load.relay);
                    guess = solve_internal_voltage(config.net, config.load, stage,
                                                   gamma_applied, guess, f_on,
                                                   e_factor_at(stage_time))
                                .v_i;
                    return (thermal_power(std::abs(guess), config.load) - theta) /
                           config.load.relay.t_th;
                };
                const double th0 = relay.theta;
                const double k1 = theta_rate(th0, t0);
                const double k2 = theta_rate(th0 + 0.5 * dt * k1, t0 + 0.5 * dt);
                const double k3 = theta_rate(th0 + 0.5 * dt * k2, t0 + 0.5 * dt);
                const double k4 = theta_rate(th0 + dt * k3, t1);
                relay.theta = th0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                relay.f_th = fth_from_theta(relay.theta, config.load.relay);
            }

            if (k_actuate >= 0 && k + 1 >= k_actuate && !rec.actuation_t) {
                gamma_applied = config.actuation->gamma;
                rec.actuation_t = t1;
            }

            const bool f_on_next = fault_on_step(k + 1);
            v = solve_internal_voltage(config.net, config.load, relay, gamma_applied, v,
                                       f_on_next, e_factor_at(t1))
                    .v_i;
            record_row(k + 1, f_on_next, e_factor_at(t1));

            if (relay.mode == MotorMode::running) {
                if (std::abs(v) < config.load.v_stall_threshold) {
                    if (++dwell_steps >= dwell_steps_needed && config.load.f_mD > 0.0) {
                        relay.mode = MotorMode::stalled;
                        relay.theta = 0.0;
                        relay.f_th = 1.0;
                        rec.stall_onset_t = t1;
                        if (config.actuation) {
                            k_actuate =
                                (k + 1) + std::llround(config.actuation->tau0 / dt);
                        }
                    }
                } else {
                    dwell_steps = 0;
                }
            }
        }
    } catch (const VoltageCollapseError& e) {
        throw VoltageCollapseError(std::string(e.what()) + " (at t = " +
                                   std::to_string(rec.t.empty() ? 0.0 : rec.t.back()) +
                                   " s; scenario aborted)");
    }
    if (has_fault) rec.fault_clear_t = t_clear;

    // PMU channels: uniform sampling at pmu_rate, linear interpolation
    // between grid rows, optional Gaussian noise on the magnitudes.
    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n_pmu =
        static_cast<std::int64_t>(std::floor(config.t_end * config.pmu_rate + 1e-9));
    rec.pmu.reserve(static_cast<std::size_t>(n_pmu) + 1);
    rec.pmu_v_i_truth.reserve(static_cast<std::size_t>(n_pmu) + 1);
    for (std::int64_t j = 0; j <= n_pmu; ++j) {
        const double tj = static_cast<double>(j) / config.pmu_rate;
        auto idx = static_cast<std::size_t>(tj / dt);
        if (idx >= rec.steps() - 1) idx = rec.steps() - 2;
        const double lam = std::clamp((tj - rec.t[idx]) / dt, 0.0, 1.0);

        Complex v0 = lerp(rec.v0[idx], rec.v0[idx + 1], lam);
        Complex i = lerp(rec.i[idx], rec.i[idx + 1], lam);
        if (config.noise_sigma > 0.0) {
            const double dv = config.noise_sigma * gauss(rng);
            const double di = config.noise_sigma * gauss(rng);
            const double v_mag = std::max(std::abs(v0) + dv, 0.0);
            const double i_mag = std::max(std::abs(i) + di, 0.0);
            v0 = std::polar(v_mag, std::arg(v0));
            i = std::polar(i_mag, std::arg(i));
        }
        rec.pmu.push_back({tj, v0, i});
        rec.pmu_v_i_truth.push_back(lerp(rec.v_i[idx], rec.v_i[idx + 1], lam));
    }
    return rec;
}

namespace {

double mean_over_window(std::span<const double> t, std::span<const double> x, double t_lo,
                        double t_hi) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] >= t_lo && t[k] <= t_hi) {
            sum += x[k];
            ++n;
        }
    }
    if (n == 0) {
        throw InsufficientDataError("no samples in window [" + std::to_string(t_lo) + ", " +
                                    std::to_string(t_hi) + "] s");
    }
    return sum / static_cast<double>(n);
}

/// Least-squares slope of x(t) over index range [lo, hi].
double slope_over(std::span<const double> t, std::span<const double> x, std::size_t lo,
                  std::size_t hi) {
    double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
    const auto n = static_cast<double>(hi - lo + 1);
    for (std::size_t k = lo; k <= hi; ++k) {
        st += t[k];
        sx += x[k];
        stt += t[k] * t[k];
        stx += t[k] * x[k];
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0) throw InsufficientDataError("degenerate slope window");
    return (n * stx - st * sx) / denom;
}

std::size_t index_at(std::span<const double> t, double time) {
    const auto it = std::lower_bound(t.begin(), t.end(), time);
    return static_cast<std::size_t>(std::distance(t.begin(), it));
}

}  // namespace

ActualTimes extract_actual_times(std::span<const double> t, std::span<const double> g,
                                 double baseline_g, double stall_onset_t) {
    if (t.size() != g.size() || t.size() < 16) {
        throw InsufficientDataError("extract_actual_times: trace too short");
    }
    const double plateau_g =
        mean_over_window(t, g, stall_onset_t + kPlateauStart, stall_onset_t + kPlateauEnd);
    const double rise = plateau_g - baseline_g;
    if (rise <= std::max(0.02, 0.10 * baseline_g)) {
        throw NotAFidvrError("extract_actual_times: no post-stall conductance plateau");
    }
    const double band = kExtractBand * rise;

    // Final settled level from the trace tail.
    const double t_last = t.back();
    const double final_g = mean_over_window(t, g, t_last - 0.5, t_last);

    // Departure from the plateau: first sustained crossing below the band.
    const std::size_t scan_from = index_at(t, stall_onset_t + kPlateauEnd);
    const double dt_sample = (t_last - t.front()) / static_cast<double>(t.size() - 1);
    const auto hold = std::max<std::size_t>(2, static_cast<std::size_t>(0.25 / dt_sample));
    std::size_t depart = t.size();
    for (std::size_t k = scan_from; k + hold < t.size(); ++k) {
        if (g[k] < plateau_g - band) {
            bool sustained = true;
            for (std::size_t j = k; j < k + hold; ++j) {
                if (g[j] >= plateau_g - band) {
                    sustained = false;
                    break;
                }
            }
            if (sustained) {
                depart = k;
                break;
            }
        }
    }
    if (depart == t.size()) {
        throw InsufficientDataError("extract_actual_times: conductance never leaves the plateau");
    }

    // Settle: last excursion above the band around the final level.
    std::size_t settle = t.size() - 1;
    while (settle > depart && g[settle - 1] <= final_g + band) --settle;
    if (t_last - t[settle] < 0.75) {
        throw InsufficientDataError("extract_actual_times: trace ends before the decline settles");
    }

    // Local slopes just inside the decline, then extrapolate to the corner.
    const double span_t = t[settle] - t[depart];
    const double w = std::min(0.25, std::max(0.1, span_t / 4.0));
    const auto wn = std::max<std::size_t>(2, static_cast<std::size_t>(w / dt_sample));

    const std::size_t dep_hi = std::min(depart + wn, t.size() - 1);
    const double slope_dep = slope_over(t, g, depart, dep_hi);
    if (!(slope_dep < 0.0)) {
        throw InsufficientDataError("extract_actual_times: no declining slope after the plateau");
    }
    const double corner_t = t[depart] + (plateau_g - g[depart]) / slope_dep;

    const std::size_t set_lo = settle > wn ? settle - wn : 0;
    const double slope_set = slope_over(t, g, std::max(set_lo, depart), settle);
    double settle_t = t[settle];
    if (slope_set < 0.0) settle_t = t[settle] + (final_g - g[settle]) / slope_set;

    ActualTimes out;
    out.plateau_g = plateau_g;
    out.final_g = final_g;
    out.corner_t = corner_t;
    out.settle_t = settle_t;
    out.t1 = corner_t - stall_onset_t;
    out.t2 = settle_t - corner_t;
    return out;
}

ScenarioConfig config_with_fmd(const ScenarioConfig& base, double f_mD) {
    ScenarioConfig config = base;
    config.load.f_mD = f_mD;
    config.load.f_st = 1.0 - config.load.f_abce() - f_mD;
    if (config.load.f_st < 0.0) {
        throw ValidationError("load.f_mD",
                              "sweep value " + std::to_string(f_mD) +
                                  " leaves a negative static share");
    }
    config.validate();
    return config;
}

ScenarioReport make_report(const TrajectoryRecord& rec, const ScenarioConfig& config) {
    ScenarioReport rep;
    rep.final_voltage = std::abs(rec.v_i.back());

    const bool has_fault = config.net.fault.duration > 0.0;
    const double baseline_end = has_fault ? config.net.fault.t_apply : config.t_end;
    rep.baseline_g = mean_over_window(rec.t, rec.g_load, 0.0, baseline_end - 1e-9);

    rep.stalled = rec.stall_onset_t.has_value();
    if (!rep.stalled) return rep;

    rep.onset_t = rec.stall_onset_t;
    const double onset = *rec.stall_onset_t;
    rep.plateau_delta_g =
        mean_over_window(rec.t, rec.g_load, onset + kPlateauStart, onset + kPlateauEnd) -
        rep.baseline_g;
    try {
        const ActualTimes times =
            extract_actual_times(rec.t, rec.g_load, rep.baseline_g, onset);
        rep.t1_actual = times.t1;
        rep.t2_actual = times.t2;
    } catch (const Error&) {
        // Plateau but no timable decline (relay never tripped or the trace
        // ended early); the report stays partial.
    }
    return rep;
}

}  // namespace fidvr
