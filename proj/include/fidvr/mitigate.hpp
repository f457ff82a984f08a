#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fidvr/monitor.hpp"
#include "fidvr/scenario.hpp"

namespace fidvr {

/// One offline-study sample: plateau conductance rise and the recovery
/// times observed for it.
struct SweepSample {
    double delta_g = 0.0;
    double t1 = 0.0;
    double t2 = 0.0;
};

/// Weighting of the offline samples. Larger recovery times get more weight
/// so the severe events are fitted best; linear-in-time is the default.
enum class WeightScheme { uniform, linear_time, quadratic_time };

struct FitDiagnostics {
    double r2_t1 = 0.0;  ///< weighted R^2 of the t1 line
    double r2_t2 = 0.0;
    std::size_t n_samples = 0;
};

/// Linear recovery-time model: t1 ~ alpha0 * dG + alpha1,
/// t2 ~ beta0 * dG + beta1. Valid per bus and contingency cluster.
struct LinearCoeffs {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double beta0 = 0.0;
    double beta1 = 0.0;
    std::string bus_id = "bus1";
    std::string cluster_id = "c0";
    FitDiagnostics diag;
};

/// Weighted least-squares fit of the two recovery-time lines. Requires at
/// least 3 samples with distinct delta_g; throws DegenerateFitError
/// otherwise.
[[nodiscard]] LinearCoeffs fit_linear_coeffs(std::span<const SweepSample> samples,
                                             WeightScheme scheme = WeightScheme::linear_time);

/// Straight-line evaluation of (t1, t2) at a conductance rise.
[[nodiscard]] std::pair<double, double> predict_times(const LinearCoeffs& coeffs,
                                                      double delta_g);

struct DisconnectSolution {
    double gamma = 1.0;               ///< connected fraction to command
    double disconnect_fraction = 0.0; ///< 1 - gamma
    double predicted_t1 = 0.0;
    double predicted_t2 = 0.0;
    bool control_needed = true;       ///< false: uncontrolled total already meets t_sp
    bool ambiguous = false;           ///< both quadratic roots physical; larger gamma kept
    double gamma_alt = 0.0;           ///< the rejected root when ambiguous
    bool infeasible_timing = false;   ///< predicted t1 does not exceed tau0
};

/// Solve the disconnection quadratic
///   (t_sp - b1 - b0*G0*gamma) * (t_sp - b1 - a1 - (b0+a0)*G0*gamma)
///     = a0 * tau0 * G0 * (1 - gamma)
/// for the connected fraction gamma in (0,1). Returns gamma = 1 when no
/// control is needed; throws InfeasibleTargetError when the target cannot be
/// met by any physical gamma.
[[nodiscard]] DisconnectSolution solve_disconnect_fraction(double t_sp, double tau0, double g0,
                                                           const LinearCoeffs& coeffs);

struct MitigationPlan {
    double t_sp = 0.0;
    double tau0 = 0.0;
    double g0 = 0.0;      ///< measured conductance rise the plan was built on
    double gamma = 1.0;
    double disconnect_fraction = 0.0;
    double predicted_t1 = 0.0;
    double predicted_t2 = 0.0;
    bool control_needed = true;
    bool ambiguous = false;
    bool infeasible_timing = false;
    bool actuated_after_recovery = false;
    std::optional<double> achieved_t1;
    std::optional<double> achieved_t2;
    std::optional<double> achieved_total;
};

/// Plan the disconnection for a detected stall and re-run the scenario with
/// the actuation applied. Achieved times come from the ground-truth relay
/// channels of the controlled run. The controlled trajectory is written to
/// `controlled_out` when given.
[[nodiscard]] MitigationPlan plan_and_apply(const StallEvent& event, const LinearCoeffs& coeffs,
                                            double t_sp, double tau0,
                                            const ScenarioConfig& base,
                                            TrajectoryRecord* controlled_out = nullptr);

/// Achieved relay timing of a (controlled or uncontrolled) run, from the
/// ground-truth theta / f_th channels.
struct RelayTiming {
    double t1 = 0.0;  ///< onset -> theta crosses theta1
    double t2 = 0.0;  ///< theta1 crossing -> f_th reaches 0
};

[[nodiscard]] std::optional<RelayTiming> relay_timing_from_record(const TrajectoryRecord& rec,
                                                                  const ThermalRelayParams& relay);

/// In-memory coefficient store keyed by (bus_id, cluster_id); concurrent
/// reads, exclusive writes. (De)serialization lives in the io layer.
class CoeffStore {
public:
    CoeffStore() = default;
    CoeffStore(const CoeffStore& other) {
        std::shared_lock lock(other.mutex_);
        entries_ = other.entries_;
    }
    CoeffStore(CoeffStore&& other) noexcept {
        std::unique_lock lock(other.mutex_);
        entries_ = std::move(other.entries_);
    }
    CoeffStore& operator=(CoeffStore other) {
        std::unique_lock lock(mutex_);
        entries_ = std::move(other.entries_);
        return *this;
    }

    void put(const LinearCoeffs& coeffs) {
        std::unique_lock lock(mutex_);
        entries_[{coeffs.bus_id, coeffs.cluster_id}] = coeffs;
    }

    [[nodiscard]] std::optional<LinearCoeffs> get(const std::string& bus_id,
                                                  const std::string& cluster_id) const {
        std::shared_lock lock(mutex_);
        const auto it = entries_.find({bus_id, cluster_id});
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] std::vector<LinearCoeffs> all() const {
        std::shared_lock lock(mutex_);
        std::vector<LinearCoeffs> out;
        out.reserve(entries_.size());
        for (const auto& [key, value] : entries_) out.push_back(value);
        return out;
    }

private:
    mutable std::shared_mutex mutex_;
    std::map<std::pair<std::string, std::string>, LinearCoeffs> entries_;
};

}  // namespace fidvr
