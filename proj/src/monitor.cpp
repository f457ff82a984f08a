#include "fidvr/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fidvr/errors.hpp"

namespace fidvr {

void CompositionInfo::validate() const {
    const auto check = [](const char* name, double value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw ValidationError(std::string("composition.") + name, "must lie in [0,1]");
        }
    };
    check("f_mA", f_mA);
    check("f_mB", f_mB);
    check("f_mC", f_mC);
    check("f_elec", f_elec);
    check("f_st", f_st);
    check("f_mD", f_mD);
    check("f_stZ", f_stZ);
    check("f_stI", f_stI);
    check("f_stP", f_stP);
    if (std::abs(f_abce() + f_st + f_mD - 1.0) > 1e-12) {
        throw ValidationError("composition.fractions", "must sum to 1");
    }
    if (std::abs(f_stZ + f_stI + f_stP - 1.0) > 1e-12) {
        throw ValidationError("composition.zip_shares", "must sum to 1");
    }
}

CompositionInfo CompositionInfo::from_load_spec(const CompositeLoadSpec& spec) {
    CompositionInfo comp;
    comp.f_mA = spec.f_mA;
    comp.f_mB = spec.f_mB;
    comp.f_mC = spec.f_mC;
    comp.f_elec = spec.f_elec;
    comp.f_st = spec.f_st;
    comp.f_mD = spec.f_mD;
    comp.f_stZ = spec.f_stZ;
    comp.f_stI = spec.f_stI;
    comp.f_stP = spec.f_stP;
    return comp;
}

Admittance admittance_from_sample(Complex v0, Complex i) {
    const double v_mag = std::abs(v0);
    if (!(v_mag > kVoltageFloor)) {
        throw DegenerateVoltageError("admittance_from_sample: |v0| = " + std::to_string(v_mag) +
                                     " pu at or below floor");
    }
    // S = |v0|^2 conj(Y)  =>  Y = i / v0.
    return Admittance(i / v0);
}

Complex internal_voltage_from_measurement(Complex v0, Complex i, Admittance y_fd) {
    if (!(y_fd.magnitude() > 0.0)) {
        throw SingularNetworkError("internal_voltage_from_measurement: singular y_fd");
    }
    return v0 - i / y_fd.value();
}

namespace {

struct InternalSample {
    double t;
    double v_mag;
    double p, q;
    double g, b;
};

InternalSample to_internal(const MeasurementSample& s, Admittance y_fd) {
    const Complex v_i = internal_voltage_from_measurement(s.v0, s.i, y_fd);
    const Complex power = complex_power(v_i, s.i);
    const double v2 = std::max(std::norm(v_i), kVoltageFloor * kVoltageFloor);
    return {s.t, std::abs(v_i), power.real(), power.imag(), power.real() / v2,
            power.imag() / v2};
}

double median(std::vector<double> values) {
    if (values.empty()) throw InsufficientDataError("median of empty window");
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                     values.end());
    double hi = values[mid];
    if (values.size() % 2 == 0) {
        std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                         values.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (values[mid - 1] + hi);
    }
    return hi;
}

}  // namespace

std::optional<StallEvent> detect_stall(std::span<const MeasurementSample> stream,
                                       Admittance y_fd, const DetectParams& params) {
    if (stream.empty()) return std::nullopt;

    // Locate the voltage dip.
    std::size_t dip = stream.size();
    for (std::size_t k = 0; k < stream.size(); ++k) {
        if (std::abs(stream[k].v0) < params.v_dip) {
            dip = k;
            break;
        }
    }
    if (dip == stream.size()) return std::nullopt;

    const double dip_t = stream[dip].t;
    if (dip_t - stream.front().t < params.baseline_window - 1e-9) {
        throw InsufficientDataError("detect_stall: less than " +
                                    std::to_string(params.baseline_window) +
                                    " s of pre-event samples");
    }

    // Baseline = median internal conductance over the window before the dip.
    std::vector<double> pre;
    for (std::size_t k = 0; k < dip; ++k) {
        if (stream[k].t >= dip_t - params.baseline_window) {
            pre.push_back(to_internal(stream[k], y_fd).g);
        }
    }
    const double baseline_g = median(std::move(pre));

    // Clearing: first sample after the dip back above the dip level.
    std::size_t clear = stream.size();
    for (std::size_t k = dip; k < stream.size(); ++k) {
        if (std::abs(stream[k].v0) >= params.v_dip) {
            clear = k;
            break;
        }
    }
    if (clear == stream.size()) return std::nullopt;  // never recovers above the dip level
    const double onset_t = stream[clear].t;

    // Sustained conductance rise after clearing.
    const double threshold = std::max(params.delta_abs, params.kappa * baseline_g);
    int run = 0;
    bool confirmed = false;
    for (std::size_t k = clear; k < stream.size(); ++k) {
        if (to_internal(stream[k], y_fd).g - baseline_g > threshold) {
            if (++run >= params.n_hold) {
                confirmed = true;
                break;
            }
        } else {
            run = 0;
        }
    }
    if (!confirmed) return std::nullopt;

    // Plateau level over the configured window.
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = clear; k < stream.size(); ++k) {
        const double dt = stream[k].t - onset_t;
        if (dt >= params.plateau_start && dt <= params.plateau_end) {
            sum += to_internal(stream[k], y_fd).g;
            ++n;
        }
    }
    if (n == 0) {
        throw InsufficientDataError("detect_stall: stream ends before the plateau window");
    }
    const double g_post = sum / static_cast<double>(n);

    StallEvent event;
    event.onset_t = onset_t;
    event.dip_t = dip_t;
    event.baseline_g = baseline_g;
    event.g_post = g_post;
    event.delta_g = g_post - baseline_g;
    return event;
}

double post_fault_voltage(std::span<const MeasurementSample> stream, Admittance y_fd,
                          double onset_t, const DetectParams& params) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : stream) {
        const double dt = s.t - onset_t;
        if (dt >= params.v_post_start && dt <= params.v_post_end) {
            sum += to_internal(s, y_fd).v_mag;
            ++n;
        }
    }
    if (n == 0) {
        throw InsufficientDataError("post_fault_voltage: no samples in the averaging window");
    }
    return sum / static_cast<double>(n);
}

namespace {

/// Shared inversion for (20) and its reactive mirror: remove the
/// reconstructed non-stall admittance from the post-fault value.
StallAdmittanceEstimate invert_stall_estimate(double y_post, double power_pre, double v_post,
                                              const CompositionInfo& comp) {
    if (!(v_post > kVoltageFloor)) {
        throw DegenerateVoltageError("stall estimate: post-fault voltage " +
                                     std::to_string(v_post) + " pu at or below floor");
    }
    const double v2 = v_post * v_post;
    const double non_stall =
        comp.f_abce() + comp.f_st * comp.f_stP + comp.f_st * comp.f_stI * v_post +
        comp.f_st * comp.f_stZ * v2;
    const double raw = y_post - power_pre / v2 * non_stall;

    StallAdmittanceEstimate est;
    if (raw >= 0.0) {
        est.value = raw;
    } else if (raw >= -0.01) {
        est.value = 0.0;
        est.clamped = true;
    } else {
        est.value = raw;
        est.composition_mismatch = true;
    }
    return est;
}

}  // namespace

StallAdmittanceEstimate estimate_stall_conductance(double g_post, double p_load_pre,
                                                   double v_post, const CompositionInfo& comp) {
    return invert_stall_estimate(g_post, p_load_pre, v_post, comp);
}

StallAdmittanceEstimate estimate_stall_susceptance(double b_post, double q_load_pre,
                                                   double v_post, const CompositionInfo& comp) {
    return invert_stall_estimate(b_post, q_load_pre, v_post, comp);
}

double to_motor_base(double g_stall_sys, const CompositionInfo& comp, double p_load_pre) {
    if (!(comp.f_mD > 0.0)) {
        throw NoMotorError("to_motor_base: composition has no motor-D stock");
    }
    return g_stall_sys / (comp.f_mD * p_load_pre);
}

std::optional<double> estimate_t1(double v_post, double g_stall_m,
                                  const ThermalRelayParams& relay) {
    relay.validate();
    const double p_post = v_post * v_post * g_stall_m;
    if (p_post <= relay.theta1) return std::nullopt;  // no trip
    return -relay.t_th * std::log(1.0 - relay.theta1 / p_post);
}

std::optional<double> estimate_t2(double v_pre, double v_post, double g_stall_m,
                                  const ThermalRelayParams& relay) {
    relay.validate();
    const double denom =
        (v_pre * v_pre + v_post * v_post) * g_stall_m - relay.theta1 - relay.theta2;
    if (denom <= 0.0) return std::nullopt;  // mean slope non-negative
    return 2.0 * relay.t_th * (relay.theta2 - relay.theta1) / denom;
}

std::optional<RecoveryEstimate> monitor_pipeline(std::span<const MeasurementSample> stream,
                                                 const CompositionInfo& comp, Admittance y_fd,
                                                 const ThermalRelayParams& relay,
                                                 const DetectParams& params) {
    comp.validate();
    const auto event = detect_stall(stream, y_fd, params);
    if (!event) return std::nullopt;

    // Pre-fault means over the baseline window.
    double v_sum = 0.0, p_sum = 0.0, q_sum = 0.0;
    std::size_t n_pre = 0;
    for (const auto& s : stream) {
        if (s.t >= event->dip_t - params.baseline_window && s.t < event->dip_t) {
            const InternalSample in = to_internal(s, y_fd);
            v_sum += in.v_mag;
            p_sum += in.p;
            q_sum += in.q;
            ++n_pre;
        }
    }
    if (n_pre == 0) throw InsufficientDataError("monitor_pipeline: empty pre-fault window");
    const double v_pre = v_sum / static_cast<double>(n_pre);
    const double p_pre = p_sum / static_cast<double>(n_pre);
    const double q_pre = q_sum / static_cast<double>(n_pre);

    const double v_post = post_fault_voltage(stream, y_fd, event->onset_t, params);

    // Plateau susceptance (the conductance plateau came with the event).
    double b_sum = 0.0;
    std::size_t n_b = 0;
    for (const auto& s : stream) {
        const double dt = s.t - event->onset_t;
        if (dt >= params.plateau_start && dt <= params.plateau_end) {
            b_sum += to_internal(s, y_fd).b;
            ++n_b;
        }
    }
    const double b_post = b_sum / static_cast<double>(n_b);

    const StallAdmittanceEstimate g_est =
        estimate_stall_conductance(event->g_post, p_pre, v_post, comp);
    const StallAdmittanceEstimate b_est =
        estimate_stall_susceptance(b_post, q_pre, v_post, comp);

    RecoveryEstimate out;
    out.onset_t = event->onset_t;
    out.delta_g = event->delta_g;
    out.v_pre = v_pre;
    out.v_post = v_post;
    out.g_stall_sys = g_est.value;
    out.b_stall_sys = b_est.value;
    out.composition_mismatch = g_est.composition_mismatch || b_est.composition_mismatch;
    out.g_stall_m = to_motor_base(std::max(g_est.value, 0.0), comp, p_pre);

    out.t1_est = estimate_t1(v_post, out.g_stall_m, relay);
    out.no_trip = !out.t1_est.has_value();
    out.t2_est = estimate_t2(v_pre, v_post, out.g_stall_m, relay);
    out.non_recovering = !out.t2_est.has_value();
    if (out.t1_est && out.t2_est) out.total_est = *out.t1_est + *out.t2_est;
    return out;
}

}  // namespace fidvr
