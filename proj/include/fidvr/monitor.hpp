#pragma once

#include <optional>
#include <span>

#include "fidvr/admittance.hpp"
#include "fidvr/load_model.hpp"
#include "fidvr/monitor_types.hpp"

namespace fidvr {

/// Utility-supplied load composition. Deliberately carries no source-side
/// network data: the estimators work from substation measurements, the
/// feeder admittance and these fractions alone.
struct CompositionInfo {
    double f_mA = 0.15;
    double f_mB = 0.05;
    double f_mC = 0.0;
    double f_elec = 0.15;
    double f_st = 0.35;
    double f_mD = 0.30;
    double f_stZ = 0.4;
    double f_stI = 0.3;
    double f_stP = 0.3;

    [[nodiscard]] double f_abce() const { return f_mA + f_mB + f_mC + f_elec; }
    void validate() const;

    [[nodiscard]] static CompositionInfo from_load_spec(const CompositeLoadSpec& spec);
};

/// Detection thresholds. The defaults assume a 60 /s reporting rate.
struct DetectParams {
    double v_dip = 0.8;            ///< pu; a dip below this marks the disturbance
    double kappa = 0.10;           ///< relative conductance rise to call a stall
    double delta_abs = 0.02;       ///< pu; absolute rise floor
    int n_hold = 12;               ///< consecutive samples the rise must persist
    double baseline_window = 1.0;  ///< s of pre-event data for the baseline
    double plateau_start = 0.5;    ///< s after onset; plateau averaging window
    double plateau_end = 1.5;
    double v_post_start = 1.0;     ///< s after onset; post-fault voltage window
    double v_post_end = 2.0;
};

struct StallEvent {
    double onset_t = 0.0;     ///< fault-clearing time
    double dip_t = 0.0;       ///< first sample of the voltage dip
    double delta_g = 0.0;     ///< plateau conductance rise over baseline (internal bus)
    double baseline_g = 0.0;
    double g_post = 0.0;      ///< plateau conductance level
};

/// Load-convention admittance from substation phasors: Y with
/// S = v0 * conj(i) = |v0|^2 * conj(Y). Throws DegenerateVoltageError at or
/// below the voltage floor.
[[nodiscard]] Admittance admittance_from_sample(Complex v0, Complex i);

/// Internal-bus voltage with the series feeder drop removed:
/// V_i = v0 - i / y_fd.
[[nodiscard]] Complex internal_voltage_from_measurement(Complex v0, Complex i, Admittance y_fd);

/// Scan a measurement stream for a voltage dip followed by a sustained
/// internal-conductance rise. Absence of detection is a valid outcome
/// (std::nullopt); at least `baseline_window` seconds of pre-dip samples are
/// required.
[[nodiscard]] std::optional<StallEvent> detect_stall(std::span<const MeasurementSample> stream,
                                                     Admittance y_fd,
                                                     const DetectParams& params = {});

/// Mean internal-bus voltage magnitude over the post-fault averaging window.
[[nodiscard]] double post_fault_voltage(std::span<const MeasurementSample> stream,
                                        Admittance y_fd, double onset_t,
                                        const DetectParams& params = {});

/// Stall admittance estimate on system base, with quality flags. Small
/// negative values are clamped to zero; larger negatives indicate the
/// supplied composition does not match the measurements.
struct StallAdmittanceEstimate {
    double value = 0.0;
    bool clamped = false;
    bool composition_mismatch = false;
};

/// Invert the post-fault conductance for the stall conductance: the
/// non-stall component groups are reconstructed from the pre-fault power and
/// the utility composition, then removed.
[[nodiscard]] StallAdmittanceEstimate estimate_stall_conductance(double g_post,
                                                                 double p_load_pre,
                                                                 double v_post,
                                                                 const CompositionInfo& comp);

/// Reactive mirror of estimate_stall_conductance, driven by the pre-fault
/// reactive power and the same composition fractions.
[[nodiscard]] StallAdmittanceEstimate estimate_stall_susceptance(double b_post,
                                                                 double q_load_pre,
                                                                 double v_post,
                                                                 const CompositionInfo& comp);

/// System-base to motor-base conversion: divide by the motor base power
/// f_mD * p_load_pre. Throws NoMotorError when f_mD = 0.
[[nodiscard]] double to_motor_base(double g_stall_sys, const CompositionInfo& comp,
                                   double p_load_pre);

/// Time for the relay temperature to reach theta1 under a step thermal
/// power input: -T_th * ln(1 - theta1 / (v_post^2 * g_stall_m)).
/// std::nullopt = the temperature never gets there (no trip).
[[nodiscard]] std::optional<double> estimate_t1(double v_post, double g_stall_m,
                                                const ThermalRelayParams& relay);

/// Mean-slope approximation of the disconnection time:
/// 2 * T_th * (theta2 - theta1) / ((v_pre^2 + v_post^2) * g_stall_m - theta1 - theta2).
/// std::nullopt = mean slope non-negative (non-recovering).
[[nodiscard]] std::optional<double> estimate_t2(double v_pre, double v_post, double g_stall_m,
                                                const ThermalRelayParams& relay);

struct RecoveryEstimate {
    double onset_t = 0.0;
    double delta_g = 0.0;  ///< measured plateau rise, system base
    double v_pre = 0.0;    ///< internal bus
    double v_post = 0.0;
    double g_stall_sys = 0.0;
    double b_stall_sys = 0.0;
    double g_stall_m = 0.0;
    std::optional<double> t1_est;
    std::optional<double> t2_est;
    std::optional<double> total_est;
    bool no_trip = false;
    bool non_recovering = false;
    bool composition_mismatch = false;
};

/// Full measurement-side chain: detect, average the post-fault voltage,
/// estimate the stall admittance, convert to motor base, and predict the
/// recovery times. std::nullopt when no stall is detected.
[[nodiscard]] std::optional<RecoveryEstimate> monitor_pipeline(
    std::span<const MeasurementSample> stream, const CompositionInfo& comp, Admittance y_fd,
    const ThermalRelayParams& relay, const DetectParams& params = {});

}  // namespace fidvr
