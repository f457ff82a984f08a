#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fidvr/mitigate.hpp"
#include "fidvr/monitor.hpp"
#include "fidvr/scenario.hpp"

namespace fidvr::io {

/// Shortest round-trip decimal representation of a double.
[[nodiscard]] std::string format_double(double value);

// ---------------------------------------------------------------------------
// Scenario configuration (JSON, versioned with schema_version)
// ---------------------------------------------------------------------------

[[nodiscard]] ScenarioConfig load_scenario_config(const std::filesystem::path& path);
[[nodiscard]] ScenarioConfig parse_scenario_config(const std::string& text);
[[nodiscard]] std::string scenario_config_to_json(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Utility data consumed by the monitor (composition, feeder, relay, detection)
// ---------------------------------------------------------------------------

struct UtilityData {
    CompositionInfo composition;
    Admittance y_fd;
    ThermalRelayParams relay;
    DetectParams detect;
};

[[nodiscard]] UtilityData load_utility_data(const std::filesystem::path& path);
[[nodiscard]] std::string utility_data_to_json(const UtilityData& data);

/// Utility-data view of a scenario configuration (what the utility would
/// hand the monitor for this feeder).
[[nodiscard]] UtilityData utility_data_from_config(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// CSV contracts
// ---------------------------------------------------------------------------

inline constexpr const char* kMeasurementHeader = "t,v0_mag,v0_ang,i_mag,i_ang,p,q,g,b";
inline constexpr const char* kSweepHeader =
    "f_mD,delta_g,t1_actual,t2_actual,t1_est,t2_est,g_stall_true,g_stall_est";

void write_measurements_csv(const std::filesystem::path& path,
                            std::span<const MeasurementSample> samples);
[[nodiscard]] std::vector<MeasurementSample> read_measurements_csv(
    const std::filesystem::path& path);
[[nodiscard]] std::vector<MeasurementSample> read_measurements_csv(std::istream& in);

void write_ground_truth_csv(const std::filesystem::path& path, const TrajectoryRecord& record);

struct SweepRow {
    double f_mD = 0.0;
    double delta_g = 0.0;
    double t1_actual = 0.0;
    double t2_actual = 0.0;
    double t1_est = 0.0;
    double t2_est = 0.0;
    double g_stall_true = 0.0;
    double g_stall_est = 0.0;
};

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows);
[[nodiscard]] std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

[[nodiscard]] std::string scenario_report_to_json(const ScenarioReport& report);
[[nodiscard]] std::string recovery_estimate_to_json(
    const std::optional<RecoveryEstimate>& estimate);
[[nodiscard]] std::string mitigation_plan_to_json(const MitigationPlan& plan);

// ---------------------------------------------------------------------------
// Coefficient store (JSON file keyed by bus / contingency cluster)
// ---------------------------------------------------------------------------

[[nodiscard]] CoeffStore load_coeff_store(const std::filesystem::path& path);
void save_coeff_store(const std::filesystem::path& path, const CoeffStore& store);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct RunManifest {
    std::string command;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
};

/// Write manifest.json into out_dir (tool version, schema version and a UTC
/// timestamp are added).
void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest);

void write_text_file(const std::filesystem::path& path, const std::string& text);
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

}  // namespace fidvr::io
