#include <doctest.h>

#include <cmath>

#include "fidvr/errors.hpp"
#include "fidvr/network.hpp"

using namespace fidvr;

namespace {

/// Pure constant-impedance unity load: Y_load = 1 at every voltage.
CompositeLoadSpec unity_resistive_load() {
    CompositeLoadSpec spec;
    spec.p_load_nom = 1.0;
    spec.f_mA = spec.f_mB = spec.f_mC = spec.f_elec = 0.0;
    spec.f_st = 1.0;
    spec.f_mD = 0.0;
    spec.f_stZ = 1.0;
    spec.f_stI = 0.0;
    spec.f_stP = 0.0;
    spec.q_over_p_abce = spec.q_over_p_stat = spec.q_over_p_mD_running = 0.0;
    return spec;
}

/// Pure constant-power load of the given size.
CompositeLoadSpec constant_power_load(double p) {
    CompositeLoadSpec spec;
    spec.p_load_nom = p;
    spec.f_mA = spec.f_mB = spec.f_mC = 0.0;
    spec.f_elec = 1.0;
    spec.f_st = 0.0;
    spec.f_mD = 0.0;
    spec.q_over_p_abce = spec.q_over_p_stat = spec.q_over_p_mD_running = 0.0;
    return spec;
}

NetworkSpec ideal_feeder_net(Admittance y_trans, double e) {
    NetworkSpec net;
    net.e_source = e;
    net.y_trans = y_trans;
    net.y_fd = Admittance::from_load(1e12, 0.0);
    net.fault.duration = 0.0;
    return net;
}

}  // namespace

TEST_CASE("effective admittance: series combination") {
    const Admittance y = Admittance::from_load(0.4, 3.0);
    const Admittance half = effective_admittance(y, y);
    CHECK(std::abs(half.value() - 0.5 * y.value()) < 1e-15);

    // -j20 in series with -j10 gives -j20/3.
    const Admittance a{Complex(0.0, -20.0)};
    const Admittance b{Complex(0.0, -10.0)};
    const Admittance eff = effective_admittance(a, b);
    CHECK(eff.value().real() == doctest::Approx(0.0));
    CHECK(eff.value().imag() == doctest::Approx(-20.0 / 3.0));

    // Ideal feeder: the series combination degenerates to the line.
    const Admittance ideal = Admittance::from_load(1e9, 0.0);
    const Admittance line = Admittance::from_impedance(0.01, 0.1);
    CHECK(std::abs(effective_admittance(ideal, line).value() - line.value()) < 1e-7);

    CHECK_THROWS_AS((void)effective_admittance(Admittance{Complex(1.0, -2.0)},
                                               Admittance{Complex(-1.0, 2.0)}),
                    SingularNetworkError);
}

TEST_CASE("voltage divider: resistive load on a reactive source") {
    // E = 1 behind y_eff = -j10 with a unity resistive load:
    // |V| = 10 / sqrt(101).
    const NetworkSpec net = ideal_feeder_net(Admittance{Complex(0.0, -10.0)}, 1.0);
    const CompositeLoadSpec load = unity_resistive_load();
    const ThermalRelayState relay;

    const SolveResult result =
        solve_internal_voltage(net, load, relay, 1.0, Complex{1.0, 0.0});
    CHECK(std::abs(result.v_i) == doctest::Approx(10.0 / std::sqrt(101.0)).epsilon(1e-9));
}

TEST_CASE("constant-power fixed point agrees with a bisection oracle") {
    const NetworkSpec net = ideal_feeder_net(Admittance{Complex(0.0, -10.0)}, 1.0);
    const CompositeLoadSpec load = constant_power_load(0.5);
    const ThermalRelayState relay;

    const SolveResult result =
        solve_internal_voltage(net, load, relay, 1.0, Complex{1.0, 0.0});
    const double v_solved = std::abs(result.v_i);

    // Scalar power-flow equation on the high-voltage branch:
    // f(V) = V * |y_eff + P/V^2| - E * |y_eff| = 0.
    const Complex y_eff = effective_admittance(net.y_fd, net.y_trans).value();
    const auto f = [&](double v) {
        return v * std::abs(y_eff + Complex(0.5 / (v * v), 0.0)) - 1.0 * std::abs(y_eff);
    };
    double lo = 0.75, hi = 1.0;
    REQUIRE(f(lo) * f(hi) < 0.0);
    for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
    }
    const double v_oracle = 0.5 * (lo + hi);
    CHECK(std::abs(v_solved - v_oracle) < 1e-8);
    CHECK(v_solved == doctest::Approx(0.99874607).epsilon(1e-7));
}

TEST_CASE("zero load: internal voltage equals the source") {
    const NetworkSpec net = ideal_feeder_net(Admittance::from_impedance(0.01, 0.1), 1.02);
    CompositeLoadSpec load = constant_power_load(1.0);
    load.p_load_nom = 0.0;  // no load at all
    const ThermalRelayState relay;
    const SolveResult result =
        solve_internal_voltage(net, load, relay, 1.0, Complex{0.9, 0.0});
    CHECK(std::abs(result.v_i - Complex{1.02, 0.0}) < 1e-12);
}

TEST_CASE("solver self-consistency residual") {
    NetworkSpec net;  // default two-bus testbed
    CompositeLoadSpec load;
    ThermalRelayState relay;
    relay.mode = MotorMode::stalled;
    relay.f_th = 1.0;

    const SolveResult result =
        solve_internal_voltage(net, load, relay, 1.0, Complex{1.0, 0.0});
    const double v = std::abs(result.v_i);
    const TheveninEquivalent th = thevenin_at_internal_bus(net, false);
    const Admittance y_load = total_load_admittance(v, load, relay, 1.0);
    const double rhs = std::abs(th.e_th) * th.y_eff.magnitude() /
                       std::abs(th.y_eff.value() + y_load.value());
    CHECK(std::abs(v - rhs) < 1e-8);
}

TEST_CASE("voltage collapse is reported, not clamped") {
    const NetworkSpec net = ideal_feeder_net(Admittance{Complex(0.0, -10.0)}, 1.0);
    const CompositeLoadSpec load = constant_power_load(50.0);  // no fixed point exists
    const ThermalRelayState relay;
    CHECK_THROWS_AS(
        (void)solve_internal_voltage(net, load, relay, 1.0, Complex{1.0, 0.0}),
        VoltageCollapseError);
}

TEST_CASE("substation quantities") {
    NetworkSpec net;

    SUBCASE("zero load: no current, no drop") {
        const auto [v0, i] = substation_quantities(Complex{1.0, 0.0}, net, Admittance{});
        CHECK(std::abs(i) == doctest::Approx(0.0));
        CHECK(std::abs(v0 - Complex{1.0, 0.0}) < 1e-15);
    }

    SUBCASE("ideal feeder: substation equals internal bus") {
        net.y_fd = Admittance::from_load(1e9, 0.0);
        const Admittance y_load = Admittance::from_load(1.0, 0.4);
        const auto [v0, i] = substation_quantities(Complex{0.95, -0.05}, net, y_load);
        CHECK(std::abs(v0 - Complex{0.95, -0.05}) < 1e-8);
        CHECK(std::abs(i - y_load.value() * Complex{0.95, -0.05}) < 1e-12);
    }

    SUBCASE("power balance at a solved operating point") {
        const CompositeLoadSpec load;
        ThermalRelayState relay;
        const SolveResult result =
            solve_internal_voltage(net, load, relay, 1.0, Complex{1.0, 0.0});
        const Admittance y_load =
            total_load_admittance(std::abs(result.v_i), load, relay, 1.0);
        const auto [v0, i] = substation_quantities(result.v_i, net, y_load);

        const Complex e{net.e_source, 0.0};
        const Complex i_src = (e - v0) * net.y_trans.value();
        // KCL at the substation bus.
        CHECK(std::abs(i_src - i) < 1e-10);

        const Complex s_source = e * std::conj(i_src);
        const Complex s_trans = (e - v0) * std::conj(i_src);
        const Complex s_fd = (v0 - result.v_i) * std::conj(i);
        const Complex s_load = result.v_i * std::conj(i);
        CHECK(std::abs(s_source - s_trans - s_fd - s_load) < 1e-8);
    }
}

TEST_CASE("stall severity is monotone in f_mD") {
    NetworkSpec net;
    double prev = 2.0;
    for (double f_mD = 0.10; f_mD <= 0.451; f_mD += 0.05) {
        CompositeLoadSpec load;
        load.f_mD = f_mD;
        load.f_st = 1.0 - load.f_abce() - f_mD;
        load.validate();
        ThermalRelayState relay;
        relay.mode = MotorMode::stalled;
        relay.f_th = 1.0;
        const double v = std::abs(
            solve_internal_voltage(net, load, relay, 1.0, Complex{0.9, 0.0}).v_i);
        CHECK(v <= prev + 1e-12);
        prev = v;
    }
}

TEST_CASE("fault thevenin depresses the source") {
    NetworkSpec net;
    const TheveninEquivalent clean = thevenin_at_internal_bus(net, false);
    const TheveninEquivalent faulted = thevenin_at_internal_bus(net, true);
    CHECK(std::abs(faulted.e_th) < 0.05 * std::abs(clean.e_th));
    CHECK(std::abs(clean.e_th) == doctest::Approx(net.e_source));
}
