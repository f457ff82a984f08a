#pragma once

#include <cmath>
#include <complex>

namespace fidvr {

using Complex = std::complex<double>;

/// Complex per-unit admittance, stored in the standard mathematical
/// convention. Load-convention accessors follow Y = G - jB, so that the
/// power drawn at voltage phasor V is S = |V|^2 * conj(Y), giving
/// P = g_load * |V|^2 and Q = b_load * |V|^2 (inductive loads have
/// b_load > 0). Network branches are unconstrained in sign.
class Admittance {
public:
    constexpr Admittance() = default;
    explicit constexpr Admittance(Complex value) : value_(value) {}

    /// Build from load-convention conductance / susceptance (Y = g - jb).
    [[nodiscard]] static constexpr Admittance from_load(double g, double b) {
        return Admittance(Complex(g, -b));
    }

    /// Series element given its impedance r + jx.
    [[nodiscard]] static Admittance from_impedance(double r, double x) {
        return Admittance(1.0 / Complex(r, x));
    }

    [[nodiscard]] constexpr Complex value() const { return value_; }
    [[nodiscard]] constexpr double g_load() const { return value_.real(); }
    [[nodiscard]] constexpr double b_load() const { return -value_.imag(); }
    [[nodiscard]] double magnitude() const { return std::abs(value_); }

    friend constexpr Admittance operator+(Admittance a, Admittance b) {
        return Admittance(a.value_ + b.value_);
    }
    friend constexpr Admittance operator-(Admittance a, Admittance b) {
        return Admittance(a.value_ - b.value_);
    }
    friend constexpr Admittance operator*(double s, Admittance y) {
        return Admittance(s * y.value_);
    }
    friend constexpr Admittance operator*(Admittance y, double s) { return s * y; }
    constexpr Admittance& operator+=(Admittance other) {
        value_ += other.value_;
        return *this;
    }
    friend constexpr bool operator==(Admittance a, Admittance b) {
        return a.value_ == b.value_;
    }

private:
    Complex value_{0.0, 0.0};
};

/// Complex power drawn by admittance y at voltage phasor v.
[[nodiscard]] inline Complex complex_power(Complex v, Admittance y) {
    return std::norm(v) * std::conj(y.value());
}

/// Complex power delivered into a device carrying current i at voltage v
/// (load convention: S = v * conj(i)).
[[nodiscard]] inline Complex complex_power(Complex v, Complex i) {
    return v * std::conj(i);
}

}  // namespace fidvr
