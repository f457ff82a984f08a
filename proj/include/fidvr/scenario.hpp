#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fidvr/load_model.hpp"
#include "fidvr/monitor_types.hpp"
#include "fidvr/network.hpp"

namespace fidvr {

/// Exponentially damped sinusoidal modulation of the source voltage after
/// fault clearing; stands in for the oscillatory behavior of the external
/// system.
struct OscillationSpec {
    double amplitude = 0.0;  ///< fraction of E, at most 0.1
    double frequency = 1.0;  ///< Hz
    double damping = 0.2;    ///< 1/s
    double phase = 0.0;      ///< rad

    void validate() const;
};

/// Smart-thermostat command: scale the connected stalled stock to `gamma`
/// at `tau0` seconds after stall onset.
struct ActuationSpec {
    double tau0 = 2.0;
    double gamma = 1.0;

    void validate() const;
};

struct ScenarioConfig {
    NetworkSpec net;
    CompositeLoadSpec load;
    double t_end = 25.0;
    double dt_sim = 1e-3;
    double pmu_rate = 60.0;  ///< samples per second
    std::optional<OscillationSpec> oscillation;
    std::optional<ActuationSpec> actuation;
    double noise_sigma = 0.0;  ///< pu, additive Gaussian on magnitude channels
    std::uint64_t seed = 0;

    void validate() const;
};

/// E(t) multiplier of the oscillation at `dt_since_clear` seconds after
/// fault clearing (1 before clearing).
[[nodiscard]] double oscillation_factor(const OscillationSpec& spec, double dt_since_clear);

/// Full simulation output: ground-truth channels on the dt_sim grid plus
/// PMU-style measurement samples at pmu_rate.
struct TrajectoryRecord {
    // ground truth, one entry per dt_sim step
    std::vector<double> t;
    std::vector<Complex> v_i;
    std::vector<Complex> v0;
    std::vector<Complex> i;
    std::vector<double> theta;
    std::vector<double> f_th;
    std::vector<double> gamma_c;
    std::vector<double> g_load;    ///< internal-bus composite conductance
    std::vector<double> b_load;
    std::vector<double> g_abce;    ///< per-component conductances
    std::vector<double> g_static;
    std::vector<double> g_motor_d;
    std::vector<double> e_applied;  ///< source magnitude actually applied
    std::vector<std::uint8_t> fault_on;

    // measurement channels at pmu_rate
    std::vector<MeasurementSample> pmu;
    std::vector<Complex> pmu_v_i_truth;  ///< internal voltage at the PMU instants

    std::optional<double> stall_onset_t;
    std::optional<double> fault_clear_t;
    std::optional<double> actuation_t;

    [[nodiscard]] std::size_t steps() const { return t.size(); }
};

/// Run the scenario: pre-fault steady state, fault window, stall trigger,
/// thermal-relay stepping as a semi-explicit index-1 DAE (RK4 stages with the
/// algebraic network solve inside each stage), optional actuation and
/// oscillation, PMU downsampling with optional noise. Throws
/// VoltageCollapseError if the network solve fails at any step.
[[nodiscard]] TrajectoryRecord run_scenario(const ScenarioConfig& config);

/// Timing extracted from a conductance trace.
struct ActualTimes {
    double t1 = 0.0;        ///< stall onset -> start of the conductance decline
    double t2 = 0.0;        ///< decline duration until settle
    double corner_t = 0.0;  ///< absolute time the decline starts
    double settle_t = 0.0;  ///< absolute time the trace settles
    double plateau_g = 0.0;
    double final_g = 0.0;
};

/// Locate the plateau and decline of a post-stall conductance trace and
/// return (t1, t2). The plateau is measured over a fixed window after onset;
/// corner instants are found by crossing a 2 %-of-rise guard band and
/// extrapolating with the local slope back to the band edge. Throws
/// NotAFidvrError when there is no plateau (no stall) and
/// InsufficientDataError when the trace ends before the decline settles.
[[nodiscard]] ActualTimes extract_actual_times(std::span<const double> t,
                                               std::span<const double> g, double baseline_g,
                                               double stall_onset_t);

/// Condensed per-scenario summary (the JSON scenario report).
struct ScenarioReport {
    bool stalled = false;
    std::optional<double> onset_t;
    double baseline_g = 0.0;
    std::optional<double> plateau_delta_g;
    std::optional<double> t1_actual;
    std::optional<double> t2_actual;
    double final_voltage = 0.0;
};

[[nodiscard]] ScenarioReport make_report(const TrajectoryRecord& record,
                                         const ScenarioConfig& config);

/// Copy of `base` with the motor-D fraction replaced; the static share
/// absorbs the change so the composition still sums to 1.
[[nodiscard]] ScenarioConfig config_with_fmd(const ScenarioConfig& base, double f_mD);

}  // namespace fidvr
