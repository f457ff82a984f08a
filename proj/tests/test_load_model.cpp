#include <doctest.h>

#include <cmath>
#include <random>

#include "fidvr/errors.hpp"
#include "fidvr/load_model.hpp"

using namespace fidvr;

namespace {

// Default testbed composition: ABCE 0.35, static 0.35 at ZIP (0.4, 0.3, 0.3),
// motor-D 0.30.
CompositeLoadSpec default_spec() { return CompositeLoadSpec{}; }

}  // namespace

TEST_CASE("composite spec validation names the offending field") {
    CompositeLoadSpec spec = default_spec();
    spec.f_st = 0.45;  // fractions now sum to 1.1
    CHECK_THROWS_WITH_AS(spec.validate(),
                         doctest::Contains("load.fractions"), ValidationError);

    spec = default_spec();
    spec.f_stZ = 0.5;  // ZIP off by 0.1
    CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("load.zip_shares"),
                         ValidationError);

    spec = default_spec();
    spec.relay.theta2 = 0.5;
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("abces admittance: hand-summed conductances") {
    const CompositeLoadSpec spec = default_spec();

    // All ZIP terms collapse at V = 1.
    CHECK(abces_admittance(1.0, spec).g_load() == doctest::Approx(0.70).epsilon(1e-12));

    // Term-by-term sum at V = 0.8:
    //   0.35/0.64 + 0.35*(0.4 + 0.3/0.8 + 0.3/0.64) = 0.546875 + 0.4353125.
    CHECK(abces_admittance(0.8, spec).g_load() ==
          doctest::Approx(0.9821875).epsilon(1e-12));

    // Pure constant power: P/V^2.
    CompositeLoadSpec pure_p;
    pure_p.p_load_nom = 1.0;
    pure_p.f_mA = 0.25;
    pure_p.f_mB = 0.0;
    pure_p.f_mC = 0.0;
    pure_p.f_elec = 0.25;
    pure_p.f_st = 0.0;
    pure_p.f_mD = 0.5;
    pure_p.validate();
    CHECK(abces_admittance(0.5, pure_p).g_load() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("abces at v = 1 is P_ABCE + P_st for any ZIP split") {
    CompositeLoadSpec spec = default_spec();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 25; ++k) {
        double z = u(rng), i = u(rng), p = u(rng);
        const double sum = z + i + p;
        if (sum == 0.0) continue;
        spec.f_stZ = z / sum;
        spec.f_stI = i / sum;
        spec.f_stP = 1.0 - spec.f_stZ - spec.f_stI;
        CHECK(abces_admittance(1.0, spec).g_load() == doctest::Approx(0.70).epsilon(1e-12));
    }
}

TEST_CASE("abces reactive side uses the same ZIP shares") {
    const CompositeLoadSpec spec = default_spec();
    const Admittance y = abces_admittance(1.0, spec);
    CHECK(y.b_load() ==
          doctest::Approx(spec.q_over_p_abce * 0.35 + spec.q_over_p_stat * 0.35).epsilon(1e-12));
}

TEST_CASE("abces rejects voltages at or below the floor") {
    CHECK_THROWS_AS((void)abces_admittance(0.04, default_spec()), DegenerateVoltageError);
    CHECK_THROWS_AS((void)abces_admittance(kVoltageFloor, default_spec()),
                    DegenerateVoltageError);
}

TEST_CASE("motor-D admittance: stalled base conversion and scaling") {
    const CompositeLoadSpec spec = default_spec();  // f_mD = 0.3, g_stall_m = 5
    ThermalRelayState st;
    st.mode = MotorMode::stalled;
    st.f_th = 1.0;

    CHECK(motor_d_admittance(st, spec, 1.0, 0.7).g_load() == doctest::Approx(1.5));
    CHECK(motor_d_admittance(st, spec, 1.0, 0.7).b_load() == doctest::Approx(1.5));
    CHECK(motor_d_admittance(st, spec, 0.6, 0.7).g_load() == doctest::Approx(0.9));

    st.f_th = 0.0;
    CHECK(motor_d_admittance(st, spec, 1.0, 0.7).magnitude() == doctest::Approx(0.0));
}

TEST_CASE("motor-D admittance is linear in gamma_c and f_th") {
    const CompositeLoadSpec spec = default_spec();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        ThermalRelayState st;
        st.mode = MotorMode::stalled;
        st.f_th = u(rng);
        const double gamma = u(rng);
        const Admittance unit = motor_d_admittance({0.0, 1.0, MotorMode::stalled}, spec, 1.0, 0.8);
        const Admittance scaled = motor_d_admittance(st, spec, gamma, 0.8);
        CHECK(scaled.g_load() == doctest::Approx(gamma * st.f_th * unit.g_load()).epsilon(1e-12));
        CHECK(scaled.b_load() == doctest::Approx(gamma * st.f_th * unit.b_load()).epsilon(1e-12));
    }
}

TEST_CASE("motor-D running mode is constant power at the applied voltage") {
    const CompositeLoadSpec spec = default_spec();
    ThermalRelayState st;  // running
    const Admittance y = motor_d_admittance(st, spec, 1.0, 0.8);
    CHECK(y.g_load() == doctest::Approx(0.3 / 0.64));
    CHECK(y.b_load() == doctest::Approx(spec.q_over_p_mD_running * 0.3 / 0.64));
}

TEST_CASE("thermal power: v^2 g_stall_m, independent of f_th") {
    const CompositeLoadSpec spec = default_spec();
    CHECK(thermal_power(0.7, spec) == doctest::Approx(2.45));
    CHECK(thermal_power(0.0, spec) == doctest::Approx(0.0));
    CHECK(thermal_power(1.0, spec) == doctest::Approx(5.0));
}

TEST_CASE("relay fraction map and its inverse") {
    const ThermalRelayParams relay;  // 0.9 / 1.5
    CHECK(fth_from_theta(0.9, relay) == doctest::Approx(1.0));
    CHECK(fth_from_theta(1.2, relay) == doctest::Approx(0.5));
    CHECK(fth_from_theta(2.0, relay) == doctest::Approx(0.0));
    CHECK(fth_from_theta(0.0, relay) == doctest::Approx(1.0));

    for (double f = 0.0; f <= 1.0; f += 0.05) {
        CHECK(fth_from_theta(theta_from_fth(f, relay), relay) == doctest::Approx(f).epsilon(1e-12));
    }
}

TEST_CASE("relay step matches the analytic exponential") {
    // Constant v = 0.7 gives P_th = 2.45 and theta(t) = 2.45 (1 - e^{-t/15}).
    const CompositeLoadSpec spec = default_spec();
    ThermalRelayState st;
    st.mode = MotorMode::stalled;
    st.theta = 0.0;
    st.f_th = 1.0;

    const double dt = 1e-3;
    double crossed_at = -1.0;
    for (int k = 1; k <= 8000; ++k) {
        const double prev = st.theta;
        st = relay_step(st, 0.7, dt, spec);
        const double t = k * dt;
        const double analytic = 2.45 * (1.0 - std::exp(-t / 15.0));
        REQUIRE(std::abs(st.theta - analytic) < 1e-8);
        if (crossed_at < 0.0 && st.theta >= 0.9) {
            crossed_at = t - dt + dt * (0.9 - prev) / (st.theta - prev);
        }
    }
    // Crossing time of theta1: -15 ln(1 - 0.9/2.45) = 6.8698 s.
    CHECK(crossed_at == doctest::Approx(6.86976).epsilon(2e-4));
    CHECK(st.f_th < 1.0);
}

TEST_CASE("relay step edge cases") {
    const CompositeLoadSpec spec = default_spec();

    SUBCASE("running mode is a no-op") {
        ThermalRelayState st;
        const ThermalRelayState out = relay_step(st, 0.3, 1e-3, spec);
        CHECK(out.theta == doctest::Approx(0.0));
        CHECK(out.f_th == doctest::Approx(1.0));
        CHECK(out.mode == MotorMode::running);
    }

    SUBCASE("equilibrium: P_th equals theta") {
        ThermalRelayState st;
        st.mode = MotorMode::stalled;
        st.theta = thermal_power(0.7, spec);
        const ThermalRelayState out = relay_step(st, 0.7, 0.1, spec);
        CHECK(out.theta == doctest::Approx(st.theta).epsilon(1e-14));
    }

    SUBCASE("dt -> 0 changes nothing") {
        ThermalRelayState st;
        st.mode = MotorMode::stalled;
        st.theta = 0.5;
        const ThermalRelayState out = relay_step(st, 0.7, 1e-12, spec);
        CHECK(std::abs(out.theta - 0.5) < 1e-11);
    }
}

TEST_CASE("relay heating is monotone while P_th exceeds theta2") {
    const CompositeLoadSpec spec = default_spec();
    ThermalRelayState st;
    st.mode = MotorMode::stalled;
    double prev_theta = st.theta;
    double prev_f = st.f_th;
    for (int k = 0; k < 20000; ++k) {
        st = relay_step(st, 0.9, 1e-3, spec);  // P_th = 4.05 > theta2
        REQUIRE(st.theta >= prev_theta);
        REQUIRE(st.f_th <= prev_f);
        prev_theta = st.theta;
        prev_f = st.f_th;
    }
    CHECK(st.f_th == doctest::Approx(0.0));
}

TEST_CASE("f_th invariant holds after any step") {
    const CompositeLoadSpec spec = default_spec();
    ThermalRelayState st;
    st.mode = MotorMode::stalled;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uv(0.3, 1.1);
    for (int k = 0; k < 1000; ++k) {
        st = relay_step(st, uv(rng), 5e-3, spec);
        REQUIRE(st.f_th == fth_from_theta(st.theta, spec.relay));
        REQUIRE(st.theta >= 0.0);
    }
}
