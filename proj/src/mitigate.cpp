#include "fidvr/mitigate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fidvr/errors.hpp"

namespace fidvr {

namespace {

struct LineFit {
    double slope;
    double intercept;
    double r2;
};

double weight_of(double time, WeightScheme scheme) {
    switch (scheme) {
        case WeightScheme::uniform: return 1.0;
        case WeightScheme::linear_time: return std::max(time, 0.0);
        case WeightScheme::quadratic_time: return std::max(time, 0.0) * std::max(time, 0.0);
    }
    return 1.0;
}

LineFit weighted_line(std::span<const SweepSample> samples, bool use_t2, WeightScheme scheme) {
    double sw = 0.0, swx = 0.0, swy = 0.0, swxx = 0.0, swxy = 0.0;
    for (const auto& s : samples) {
        const double y = use_t2 ? s.t2 : s.t1;
        const double w = weight_of(y, scheme);
        sw += w;
        swx += w * s.delta_g;
        swy += w * y;
        swxx += w * s.delta_g * s.delta_g;
        swxy += w * s.delta_g * y;
    }
    if (!(sw > 0.0)) throw DegenerateFitError("fit_linear_coeffs: all weights vanish");
    const double denom = sw * swxx - swx * swx;
    if (denom <= 1e-12 * sw * swxx || swxx == 0.0) {
        throw DegenerateFitError("fit_linear_coeffs: delta_g values do not span a line");
    }
    LineFit fit{};
    fit.slope = (sw * swxy - swx * swy) / denom;
    fit.intercept = (swy - fit.slope * swx) / sw;

    const double y_bar = swy / sw;
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& s : samples) {
        const double y = use_t2 ? s.t2 : s.t1;
        const double w = weight_of(y, scheme);
        const double e = y - (fit.slope * s.delta_g + fit.intercept);
        ss_res += w * e * e;
        ss_tot += w * (y - y_bar) * (y - y_bar);
    }
    fit.r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : (ss_res <= 1e-30 ? 1.0 : 0.0);
    return fit;
}

}  // namespace

LinearCoeffs fit_linear_coeffs(std::span<const SweepSample> samples, WeightScheme scheme) {
    if (samples.size() < 3) {
        throw DegenerateFitError("fit_linear_coeffs: need at least 3 samples, got " +
                                 std::to_string(samples.size()));
    }
    const LineFit f1 = weighted_line(samples, false, scheme);
    const LineFit f2 = weighted_line(samples, true, scheme);

    LinearCoeffs coeffs;
    coeffs.alpha0 = f1.slope;
    coeffs.alpha1 = f1.intercept;
    coeffs.beta0 = f2.slope;
    coeffs.beta1 = f2.intercept;
    coeffs.diag = {f1.r2, f2.r2, samples.size()};
    return coeffs;
}

std::pair<double, double> predict_times(const LinearCoeffs& coeffs, double delta_g) {
    if (!(delta_g >= 0.0)) throw ValidationError("delta_g", "must be >= 0");
    return {coeffs.alpha0 * delta_g + coeffs.alpha1, coeffs.beta0 * delta_g + coeffs.beta1};
}

DisconnectSolution solve_disconnect_fraction(double t_sp, double tau0, double g0,
                                             const LinearCoeffs& coeffs) {
    if (!(tau0 >= 0.0)) throw ValidationError("tau0", "must be >= 0");
    if (!(g0 > 0.0)) throw ValidationError("g0", "must be > 0");

    DisconnectSolution sol;
    const auto [t1_unc, t2_unc] = predict_times(coeffs, g0);
    if (t1_unc + t2_unc <= t_sp) {
        sol.gamma = 1.0;
        sol.disconnect_fraction = 0.0;
        sol.control_needed = false;
        sol.predicted_t1 = t1_unc;
        sol.predicted_t2 = t2_unc;
        return sol;
    }
    if (!(t_sp > coeffs.alpha1 + coeffs.beta1)) {
        throw InfeasibleTargetError(
            "solve_disconnect_fraction: t_sp below the zero-rise recovery time " +
            std::to_string(coeffs.alpha1 + coeffs.beta1) + " s");
    }

    // (A - p*gamma)(B - q*gamma) = r*(1 - gamma), expanded to
    // p*q*gamma^2 + (r - A*q - B*p)*gamma + (A*B - r) = 0.
    const double big_a = t_sp - coeffs.beta1;
    const double big_b = t_sp - coeffs.beta1 - coeffs.alpha1;
    const double p = coeffs.beta0 * g0;
    const double q = (coeffs.alpha0 + coeffs.beta0) * g0;
    const double r = coeffs.alpha0 * tau0 * g0;

    const double qa = p * q;
    const double qb = r - big_a * q - big_b * p;
    const double qc = big_a * big_b - r;

    double roots[2];
    int n_roots = 0;
    if (std::abs(qa) <= 1e-14 * (std::abs(qb) + std::abs(qc))) {
        if (qb != 0.0) roots[n_roots++] = -qc / qb;
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            const double big = qb >= 0.0 ? -0.5 * (qb + s) : -0.5 * (qb - s);
            roots[n_roots++] = big / qa;
            if (big != 0.0) roots[n_roots++] = qc / big;
        }
    }

    double physical[2];
    int n_physical = 0;
    for (int k = 0; k < n_roots; ++k) {
        if (roots[k] > 0.0 && roots[k] < 1.0) physical[n_physical++] = roots[k];
    }
    if (n_physical == 0) {
        throw InfeasibleTargetError(
            "solve_disconnect_fraction: no physically realizable gamma for t_sp = " +
            std::to_string(t_sp) + " s, tau0 = " + std::to_string(tau0) + " s");
    }
    if (n_physical == 2) {
        sol.ambiguous = true;
        sol.gamma = std::max(physical[0], physical[1]);  // least shedding
        sol.gamma_alt = std::min(physical[0], physical[1]);
    } else {
        sol.gamma = physical[0];
    }
    sol.disconnect_fraction = 1.0 - sol.gamma;
    sol.predicted_t2 = coeffs.beta0 * sol.gamma * g0 + coeffs.beta1;
    sol.predicted_t1 = t_sp - sol.predicted_t2;
    sol.infeasible_timing = !(sol.predicted_t1 > tau0);
    return sol;
}

std::optional<RelayTiming> relay_timing_from_record(const TrajectoryRecord& rec,
                                                    const ThermalRelayParams& relay) {
    if (!rec.stall_onset_t) return std::nullopt;
    const double onset = *rec.stall_onset_t;

    // theta1 crossing, interpolated between grid rows.
    std::size_t k1 = 0;
    bool found1 = false;
    for (std::size_t k = 1; k < rec.steps(); ++k) {
        if (rec.t[k] <= onset) continue;
        if (rec.theta[k] >= relay.theta1 && rec.theta[k - 1] < relay.theta1) {
            k1 = k;
            found1 = true;
            break;
        }
    }
    if (!found1) return std::nullopt;
    const double lam1 =
        (relay.theta1 - rec.theta[k1 - 1]) / (rec.theta[k1] - rec.theta[k1 - 1]);
    const double t_theta1 = rec.t[k1 - 1] + lam1 * (rec.t[k1] - rec.t[k1 - 1]);

    // f_th reaching zero.
    std::size_t k2 = 0;
    bool found2 = false;
    for (std::size_t k = k1; k < rec.steps(); ++k) {
        if (rec.f_th[k] <= 0.0) {
            k2 = k;
            found2 = true;
            break;
        }
    }
    if (!found2) return std::nullopt;
    double t_zero = rec.t[k2];
    if (k2 > 0 && rec.f_th[k2 - 1] > 0.0) {
        const double lam2 = rec.f_th[k2 - 1] / (rec.f_th[k2 - 1] - rec.f_th[k2]);
        t_zero = rec.t[k2 - 1] + lam2 * (rec.t[k2] - rec.t[k2 - 1]);
    }

    RelayTiming timing;
    timing.t1 = t_theta1 - onset;
    timing.t2 = t_zero - t_theta1;
    return timing;
}

MitigationPlan plan_and_apply(const StallEvent& event, const LinearCoeffs& coeffs, double t_sp,
                              double tau0, const ScenarioConfig& base,
                              TrajectoryRecord* controlled_out) {
    const DisconnectSolution sol = solve_disconnect_fraction(t_sp, tau0, event.delta_g, coeffs);

    MitigationPlan plan;
    plan.t_sp = t_sp;
    plan.tau0 = tau0;
    plan.g0 = event.delta_g;
    plan.gamma = sol.gamma;
    plan.disconnect_fraction = sol.disconnect_fraction;
    plan.predicted_t1 = sol.predicted_t1;
    plan.predicted_t2 = sol.predicted_t2;
    plan.control_needed = sol.control_needed;
    plan.ambiguous = sol.ambiguous;
    plan.infeasible_timing = sol.infeasible_timing;

    ScenarioConfig controlled = base;
    if (sol.control_needed) {
        controlled.actuation = ActuationSpec{tau0, sol.gamma};
    } else {
        controlled.actuation.reset();
    }

    TrajectoryRecord rec = run_scenario(controlled);
    if (const auto timing = relay_timing_from_record(rec, controlled.load.relay)) {
        plan.achieved_t1 = timing->t1;
        plan.achieved_t2 = timing->t2;
        plan.achieved_total = timing->t1 + timing->t2;
        if (rec.actuation_t && *rec.actuation_t > *rec.stall_onset_t + timing->t1 + timing->t2) {
            plan.actuated_after_recovery = true;
        }
    }
    if (controlled_out) *controlled_out = std::move(rec);
    return plan;
}

}  // namespace fidvr
