#pragma once

#include <vector>

#include "fidvr/mitigate.hpp"

namespace fidvr::reference {

/// Bundled reference case: recovery-time coefficients for one studied bus
/// and contingency cluster, with the recovery times and disconnection
/// fractions recorded for them. reproduce_* recomputes the derived values
/// and checks them against the recorded ones.

inline constexpr double kTimeTolerance = 0.1;           ///< s
inline constexpr double kDisconnectTolerancePct = 1.5;  ///< percentage points
inline constexpr double kReferenceRise = 0.19;          ///< pu, the disconnection study point

[[nodiscard]] LinearCoeffs coefficients();

struct TimesRow {
    double delta_g = 0.0;
    double t1_expected = 0.0;
    double t2_expected = 0.0;
    double t1_computed = 0.0;
    double t2_computed = 0.0;
    bool pass = false;
};

[[nodiscard]] std::vector<TimesRow> reproduce_recovery_times();

struct DisconnectRow {
    double t_sp = 0.0;
    double tau0 = 0.0;
    double expected_pct = 0.0;
    double computed_pct = 0.0;
    bool pass = false;
};

[[nodiscard]] std::vector<DisconnectRow> reproduce_disconnect_fractions();

}  // namespace fidvr::reference
