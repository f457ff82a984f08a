#include <doctest.h>

#include <cmath>

#include "fidvr/admittance.hpp"

using namespace fidvr;

TEST_CASE("load convention: Y = g - jb, S = |V|^2 conj(Y)") {
    const Admittance y = Admittance::from_load(0.5, 0.3);
    CHECK(y.value().real() == doctest::Approx(0.5));
    CHECK(y.value().imag() == doctest::Approx(-0.3));
    CHECK(y.g_load() == doctest::Approx(0.5));
    CHECK(y.b_load() == doctest::Approx(0.3));

    // Inductive load consumes Q > 0.
    const Complex v = std::polar(0.8, 0.4);
    const Complex s = complex_power(v, y);
    CHECK(s.real() == doctest::Approx(0.5 * 0.64));
    CHECK(s.imag() == doctest::Approx(0.3 * 0.64));
}

TEST_CASE("series branch from impedance") {
    const Admittance y = Admittance::from_impedance(0.0, 0.1);
    CHECK(y.value().real() == doctest::Approx(0.0));
    CHECK(y.value().imag() == doctest::Approx(-10.0));
    CHECK(y.b_load() == doctest::Approx(10.0));  // inductive
    CHECK(y.magnitude() == doctest::Approx(10.0));
}

TEST_CASE("power via S = v conj(i) matches the admittance form") {
    const Admittance y = Admittance::from_load(0.7, -0.2);
    const Complex v = std::polar(1.02, -0.3);
    const Complex i = y.value() * v;
    const Complex s_vi = complex_power(v, i);
    const Complex s_y = complex_power(v, y);
    CHECK(std::abs(s_vi - s_y) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("admittance arithmetic") {
    const Admittance a = Admittance::from_load(1.0, 2.0);
    const Admittance b = Admittance::from_load(0.5, -1.0);
    CHECK((a + b).g_load() == doctest::Approx(1.5));
    CHECK((a + b).b_load() == doctest::Approx(1.0));
    CHECK((a - b).b_load() == doctest::Approx(3.0));
    CHECK((2.0 * b).g_load() == doctest::Approx(1.0));
}
