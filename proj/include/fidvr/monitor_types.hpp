#pragma once

#include "fidvr/admittance.hpp"

namespace fidvr {

/// One PMU report at the substation: voltage and current phasors plus the
/// derived power and load-convention admittance.
struct MeasurementSample {
    double t = 0.0;
    Complex v0;
    Complex i;

    [[nodiscard]] double p() const { return complex_power(v0, i).real(); }
    [[nodiscard]] double q() const { return complex_power(v0, i).imag(); }
    [[nodiscard]] double g() const { return p() / std::norm(v0); }
    [[nodiscard]] double b() const { return q() / std::norm(v0); }
};

}  // namespace fidvr
