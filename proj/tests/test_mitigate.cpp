#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fidvr/errors.hpp"
#include "fidvr/mitigate.hpp"
#include "fidvr/reference_case.hpp"
#include "test_support.hpp"

using namespace fidvr;

TEST_CASE("fit: collinear samples are interpolated exactly, any weighting") {
    std::vector<SweepSample> samples;
    for (double dg : {0.1, 0.2, 0.3, 0.4}) {
        samples.push_back({dg, 40.0 * dg + 2.0, 15.0 * dg + 3.0});
    }
    for (const auto scheme :
         {WeightScheme::uniform, WeightScheme::linear_time, WeightScheme::quadratic_time}) {
        const LinearCoeffs coeffs = fit_linear_coeffs(samples, scheme);
        CHECK(coeffs.alpha0 == doctest::Approx(40.0).epsilon(1e-12));
        CHECK(coeffs.alpha1 == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(coeffs.beta0 == doctest::Approx(15.0).epsilon(1e-12));
        CHECK(coeffs.beta1 == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(coeffs.diag.r2_t1 == doctest::Approx(1.0));
        CHECK(coeffs.diag.r2_t2 == doctest::Approx(1.0));
    }
}

TEST_CASE("fit: degenerate inputs") {
    std::vector<SweepSample> two = {{0.1, 6.0, 5.0}, {0.2, 7.0, 6.0}};
    CHECK_THROWS_AS((void)fit_linear_coeffs(two), DegenerateFitError);

    std::vector<SweepSample> flat = {{0.2, 6.0, 5.0}, {0.2, 7.0, 6.0}, {0.2, 8.0, 7.0}};
    CHECK_THROWS_AS((void)fit_linear_coeffs(flat), DegenerateFitError);
}

TEST_CASE("fit: uniform weights equal the closed-form OLS normal equations") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SweepSample> samples;
    for (int k = 0; k < 12; ++k) {
        const double dg = 0.05 + 0.4 * u(rng);
        samples.push_back({dg, 30.0 * dg + 3.0 + 0.5 * (u(rng) - 0.5),
                           12.0 * dg + 4.0 + 0.5 * (u(rng) - 0.5)});
    }
    const LinearCoeffs coeffs = fit_linear_coeffs(samples, WeightScheme::uniform);

    const auto n = static_cast<double>(samples.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : samples) {
        sx += s.delta_g;
        sy += s.t1;
        sxx += s.delta_g * s.delta_g;
        sxy += s.delta_g * s.t1;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    CHECK(coeffs.alpha0 == doctest::Approx(slope).epsilon(1e-10));
    CHECK(coeffs.alpha1 == doctest::Approx(intercept).epsilon(1e-10));
}

TEST_CASE("predict: reference coefficient spot checks") {
    const LinearCoeffs coeffs = reference::coefficients();
    const auto [t1a, t2a] = predict_times(coeffs, 0.19);
    CHECK(t1a == doctest::Approx(9.9).epsilon(0.011));
    CHECK(t2a == doctest::Approx(7.3).epsilon(0.011));

    const auto [t1b, t2b] = predict_times(coeffs, 0.27);
    CHECK(t1b == doctest::Approx(13.1).epsilon(0.011));
    CHECK(t2b == doctest::Approx(8.7).epsilon(0.011));

    const auto [t1c, t2c] = predict_times(coeffs, 0.0);
    CHECK(t1c == doctest::Approx(2.4));
    CHECK(t2c == doctest::Approx(4.0));
}

TEST_CASE("disconnection quadratic: recorded reference fractions") {
    for (const auto& row : reference::reproduce_disconnect_fractions()) {
        INFO("t_sp = ", row.t_sp, " tau0 = ", row.tau0);
        CHECK(row.pass);
    }
    // First row lands near gamma = 0.638 (36 % disconnection).
    const DisconnectSolution sol =
        solve_disconnect_fraction(14.0, 2.0, 0.19, reference::coefficients());
    CHECK(sol.gamma == doctest::Approx(0.638).epsilon(2e-3));
    CHECK(!sol.ambiguous);
    CHECK(!sol.infeasible_timing);
}

TEST_CASE("disconnection quadratic: algebraic identity of the returned root") {
    const LinearCoeffs coeffs = reference::coefficients();
    for (const double t_sp : {13.0, 14.0, 15.0}) {
        for (const double tau0 : {1.0, 2.0, 3.0}) {
            const DisconnectSolution sol = solve_disconnect_fraction(t_sp, tau0, 0.19, coeffs);
            if (!sol.control_needed) continue;
            const double g1 = sol.gamma * 0.19;
            const double t2 = coeffs.beta0 * g1 + coeffs.beta1;
            const double t1 = t_sp - t2;
            const double tau1 = t1 - tau0;
            const double g_avg = (tau0 * 0.19 + tau1 * g1) / (tau0 + tau1);
            const double t1_back = coeffs.alpha0 * g_avg + coeffs.alpha1;
            REQUIRE(std::abs(t1_back + t2 - t_sp) < 1e-9);
        }
    }
}

TEST_CASE("disconnection quadratic: no action when the target is already met") {
    const LinearCoeffs coeffs = reference::coefficients();
    // Uncontrolled total at 0.19 is 17.23 s.
    const DisconnectSolution sol = solve_disconnect_fraction(18.0, 2.0, 0.19, coeffs);
    CHECK(!sol.control_needed);
    CHECK(sol.gamma == doctest::Approx(1.0));
    CHECK(sol.disconnect_fraction == doctest::Approx(0.0));
}

TEST_CASE("disconnection quadratic: unreachable target") {
    const LinearCoeffs coeffs = reference::coefficients();
    // Even full disconnection cannot beat alpha1 + beta1 = 6.4 s.
    CHECK_THROWS_AS((void)solve_disconnect_fraction(6.0, 2.0, 0.19, coeffs),
                    InfeasibleTargetError);
}

TEST_CASE("disconnection quadratic: root bracketing by interval evaluation") {
    const LinearCoeffs coeffs = reference::coefficients();
    const double g0 = 0.19;
    const auto quadratic = [&](double t_sp, double tau0, double gamma) {
        const double lhs = (t_sp - coeffs.beta1 - coeffs.beta0 * g0 * gamma) *
                           (t_sp - coeffs.beta1 - coeffs.alpha1 -
                            (coeffs.beta0 + coeffs.alpha0) * g0 * gamma);
        return lhs - coeffs.alpha0 * tau0 * g0 * (1.0 - gamma);
    };
    for (const double t_sp : {10.0, 12.0, 14.0, 16.0}) {
        for (const double tau0 : {1.0, 2.0, 3.0}) {
            const auto [t1, t2] = predict_times(coeffs, g0);
            if (!(t_sp > coeffs.alpha1 + coeffs.beta1 && t_sp < t1 + t2)) continue;
            REQUIRE(quadratic(t_sp, tau0, 0.0) * quadratic(t_sp, tau0, 1.0) < 0.0);
        }
    }
}

TEST_CASE("gamma is monotone in t_sp and tau0") {
    const LinearCoeffs coeffs = reference::coefficients();
    double prev = 1.0;
    for (const double t_sp : {16.0, 15.0, 14.0, 13.0, 12.0, 11.0}) {
        const DisconnectSolution sol = solve_disconnect_fraction(t_sp, 2.0, 0.19, coeffs);
        CHECK(sol.gamma <= prev + 1e-12);
        prev = sol.gamma;
    }
    prev = 1.0;
    for (const double tau0 : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const DisconnectSolution sol = solve_disconnect_fraction(13.5, tau0, 0.19, coeffs);
        CHECK(sol.gamma <= prev + 1e-12);
        prev = sol.gamma;
    }
}

TEST_CASE("relay timing from a record matches the trace extraction") {
    const ScenarioConfig config = testing::default_scenario(0.30, 16.0);
    const TrajectoryRecord rec = run_scenario(config);
    const auto timing = relay_timing_from_record(rec, config.load.relay);
    REQUIRE(timing.has_value());

    const ScenarioReport report = make_report(rec, config);
    REQUIRE(report.t1_actual.has_value());
    CHECK(std::abs(timing->t1 - *report.t1_actual) / timing->t1 < 0.02);
    CHECK(std::abs(timing->t2 - *report.t2_actual) / timing->t2 < 0.05);
}

TEST_CASE("plan_and_apply: gamma = 1 leaves the trajectory untouched") {
    const ScenarioConfig config = testing::default_scenario(0.30, 16.0);
    const TrajectoryRecord base = run_scenario(config);

    StallEvent event;
    event.onset_t = *base.stall_onset_t;
    event.delta_g = 0.19;
    LinearCoeffs coeffs = reference::coefficients();

    TrajectoryRecord controlled;
    const MitigationPlan plan = plan_and_apply(event, coeffs, 20.0, 2.0, config, &controlled);
    CHECK(!plan.control_needed);
    CHECK(plan.gamma == doctest::Approx(1.0));
    REQUIRE(controlled.steps() == base.steps());
    for (std::size_t k = 0; k < base.steps(); k += 97) {
        REQUIRE(controlled.v_i[k] == base.v_i[k]);
    }
}

TEST_CASE("plan_and_apply: near-total disconnection recovers shortly after tau0") {
    const ScenarioConfig config = testing::default_scenario(0.30, 16.0);
    ScenarioConfig forced = config;
    forced.actuation = ActuationSpec{2.0, 0.02};
    const TrajectoryRecord rec = run_scenario(forced);
    const auto timing = relay_timing_from_record(rec, config.load.relay);
    REQUIRE(timing.has_value());
    // Recovery completes within a few seconds of the actuation.
    CHECK(timing->t1 + timing->t2 < 2.0 + 3.5);
}
