// fidvr: desk-scale delayed-voltage-recovery lab.
// Subcommands bind the simulator, monitor, offline learning and the
// smart-thermostat mitigation into reproducible file-based experiments.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fidvr/errors.hpp"
#include "fidvr/io.hpp"
#include "fidvr/logging.hpp"
#include "fidvr/mitigate.hpp"
#include "fidvr/monitor.hpp"
#include "fidvr/recovery_oracle.hpp"
#include "fidvr/reference_case.hpp"
#include "fidvr/scenario.hpp"
#include "fidvr/version.hpp"

namespace fs = std::filesystem;
using namespace fidvr;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

ScenarioConfig load_config(const CommonOpts& opts) {
    ScenarioConfig config = io::load_scenario_config(opts.config_path);
    if (opts.seed) config.seed = *opts.seed;
    return config;
}

void write_scenario_outputs(const fs::path& out, const ScenarioConfig& config,
                            const TrajectoryRecord& record, const ScenarioReport& report) {
    io::write_measurements_csv(out / "measurements.csv", record.pmu);
    io::write_ground_truth_csv(out / "ground_truth.csv", record);
    io::write_text_file(out / "report.json", io::scenario_report_to_json(report));
    io::write_text_file(out / "utility.json",
                        io::utility_data_to_json(io::utility_data_from_config(config)));
}

int cmd_simulate(const CommonOpts& opts) {
    const ScenarioConfig config = load_config(opts);
    const TrajectoryRecord record = run_scenario(config);
    const ScenarioReport report = make_report(record, config);
    const fs::path out(opts.out_dir);
    write_scenario_outputs(out, config, record, report);
    io::write_manifest(out, {"simulate", opts.config_path, config.seed, opts.out_dir});
    std::cout << io::scenario_report_to_json(report);
    return 0;
}

io::SweepRow sweep_point(const ScenarioConfig& base, double f_mD) {
    const ScenarioConfig config = config_with_fmd(base, f_mD);
    const TrajectoryRecord record = run_scenario(config);
    const ScenarioReport report = make_report(record, config);
    const io::UtilityData utility = io::utility_data_from_config(config);
    const auto estimate = monitor_pipeline(record.pmu, utility.composition, utility.y_fd,
                                           utility.relay, utility.detect);

    io::SweepRow row;
    row.f_mD = f_mD;
    row.g_stall_true = config.load.f_mD * config.load.p_load_nom * config.load.g_stall_m;
    row.delta_g = estimate ? estimate->delta_g : report.plateau_delta_g.value_or(kNan);
    row.t1_actual = report.t1_actual.value_or(kNan);
    row.t2_actual = report.t2_actual.value_or(kNan);
    row.t1_est = estimate && estimate->t1_est ? *estimate->t1_est : kNan;
    row.t2_est = estimate && estimate->t2_est ? *estimate->t2_est : kNan;
    row.g_stall_est = estimate ? estimate->g_stall_sys : kNan;
    return row;
}

int cmd_sweep(const CommonOpts& opts, const std::string& param,
              const std::vector<double>& values) {
    if (param != "f_mD") {
        throw ValidationError("param", "only f_mD is sweepable, got '" + param + "'");
    }
    const ScenarioConfig base = load_config(opts);

    // Scenario points are independent; run them concurrently.
    std::vector<std::future<io::SweepRow>> futures;
    futures.reserve(values.size());
    for (const double v : values) {
        futures.push_back(
            std::async(std::launch::async, [&base, v] { return sweep_point(base, v); }));
    }
    std::vector<io::SweepRow> rows;
    rows.reserve(values.size());
    for (auto& f : futures) rows.push_back(f.get());

    const fs::path out(opts.out_dir);
    io::write_sweep_csv(out / "sweep.csv", rows);
    io::write_manifest(out, {"sweep", opts.config_path, base.seed, opts.out_dir});
    std::cout << "wrote " << (out / "sweep.csv").string() << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_monitor(const std::string& measurements_path, const std::string& utility_path,
                const std::string& out_dir) {
    const io::UtilityData utility = io::load_utility_data(utility_path);
    std::vector<MeasurementSample> samples;
    if (measurements_path == "-") {
        samples = io::read_measurements_csv(std::cin);
    } else {
        samples = io::read_measurements_csv(fs::path(measurements_path));
    }
    const auto estimate = monitor_pipeline(samples, utility.composition, utility.y_fd,
                                           utility.relay, utility.detect);
    const std::string body = io::recovery_estimate_to_json(estimate);
    std::cout << body;
    if (!out_dir.empty()) {
        const fs::path out(out_dir);
        io::write_text_file(out / "estimate.json", body);
        io::write_manifest(out, {"monitor", measurements_path, 0, out_dir});
    }
    return 0;
}

WeightScheme parse_weights(const std::string& name) {
    if (name == "uniform") return WeightScheme::uniform;
    if (name == "linear") return WeightScheme::linear_time;
    if (name == "quadratic") return WeightScheme::quadratic_time;
    throw ValidationError("weights", "expected uniform|linear|quadratic, got '" + name + "'");
}

int cmd_learn(const std::string& sweep_path, const std::string& coeffs_path,
              const std::string& bus, const std::string& cluster, const std::string& weights) {
    const auto rows = io::read_sweep_csv(sweep_path);
    std::vector<SweepSample> samples;
    for (const auto& r : rows) {
        if (std::isfinite(r.delta_g) && std::isfinite(r.t1_actual) && std::isfinite(r.t2_actual)) {
            samples.push_back({r.delta_g, r.t1_actual, r.t2_actual});
        }
    }
    LinearCoeffs coeffs = fit_linear_coeffs(samples, parse_weights(weights));
    coeffs.bus_id = bus;
    coeffs.cluster_id = cluster;

    CoeffStore store;
    if (fs::exists(coeffs_path)) store = io::load_coeff_store(coeffs_path);
    store.put(coeffs);
    io::save_coeff_store(coeffs_path, store);

    const fs::path store_path(coeffs_path);
    const fs::path out = store_path.has_parent_path() ? store_path.parent_path() : fs::path(".");
    io::write_manifest(out, {"learn", sweep_path, 0, out.string()});
    std::printf("fit %s/%s on %zu samples: t1 = %.4g*dG + %.4g (R2 %.4f), t2 = %.4g*dG + %.4g (R2 %.4f)\n",
                bus.c_str(), cluster.c_str(), samples.size(), coeffs.alpha0, coeffs.alpha1,
                coeffs.diag.r2_t1, coeffs.beta0, coeffs.beta1, coeffs.diag.r2_t2);
    return 0;
}

int cmd_mitigate(const CommonOpts& opts, const std::string& coeffs_path, double t_sp,
                 double tau0, const std::string& bus, const std::string& cluster) {
    const ScenarioConfig config = load_config(opts);
    const CoeffStore store = io::load_coeff_store(coeffs_path);
    const auto coeffs = store.get(bus, cluster);
    if (!coeffs) {
        throw ValidationError("coeffs", "no entry for bus '" + bus + "' cluster '" + cluster +
                                            "' in " + coeffs_path);
    }

    // Uncontrolled run feeds the detector that the plan reacts to.
    const TrajectoryRecord base_record = run_scenario(config);
    const io::UtilityData utility = io::utility_data_from_config(config);
    const auto event = detect_stall(base_record.pmu, utility.y_fd, utility.detect);
    if (!event) {
        throw NotAFidvrError("mitigate: no stall detected in the uncontrolled run");
    }

    TrajectoryRecord controlled;
    const MitigationPlan plan = plan_and_apply(*event, *coeffs, t_sp, tau0, config, &controlled);
    if (plan.actuated_after_recovery) {
        log::warn("actuation fired after the recovery completed; plan is a no-op");
    }

    const fs::path out(opts.out_dir);
    const ScenarioReport report = make_report(controlled, config);
    write_scenario_outputs(out, config, controlled, report);
    io::write_text_file(out / "plan.json", io::mitigation_plan_to_json(plan));
    io::write_manifest(out, {"mitigate", opts.config_path, config.seed, opts.out_dir});
    std::cout << io::mitigation_plan_to_json(plan);
    return 0;
}

int cmd_tables(const std::string& out_dir) {
    const auto times = reference::reproduce_recovery_times();
    const auto disconnect = reference::reproduce_disconnect_fractions();

    bool all_pass = true;
    std::printf("recovery times (tolerance %.2g s):\n", reference::kTimeTolerance);
    std::printf("  %-8s %-18s %-18s %s\n", "dG", "t1 comp/expect", "t2 comp/expect", "status");
    for (const auto& row : times) {
        all_pass = all_pass && row.pass;
        std::printf("  %-8.3g %7.2f / %-8.1f %7.2f / %-8.1f %s\n", row.delta_g, row.t1_computed,
                    row.t1_expected, row.t2_computed, row.t2_expected,
                    row.pass ? "pass" : "FAIL");
    }
    std::printf("disconnect fractions at dG = %.2f (tolerance %.2g points):\n",
                reference::kReferenceRise, reference::kDisconnectTolerancePct);
    std::printf("  %-6s %-6s %-18s %s\n", "t_sp", "tau0", "comp/expect %", "status");
    for (const auto& row : disconnect) {
        all_pass = all_pass && row.pass;
        std::printf("  %-6.3g %-6.3g %7.2f / %-8.1f %s\n", row.t_sp, row.tau0, row.computed_pct,
                    row.expected_pct, row.pass ? "pass" : "FAIL");
    }
    std::printf("reference reproduction: %s\n", all_pass ? "all rows pass" : "FAILURES present");

    if (!out_dir.empty()) {
        std::string body = "delta_g,t1_computed,t1_expected,t2_computed,t2_expected,pass\n";
        for (const auto& row : times) {
            body += io::format_double(row.delta_g) + "," + io::format_double(row.t1_computed) +
                    "," + io::format_double(row.t1_expected) + "," +
                    io::format_double(row.t2_computed) + "," +
                    io::format_double(row.t2_expected) + "," + (row.pass ? "1" : "0") + "\n";
        }
        body += "t_sp,tau0,pct_computed,pct_expected,pass\n";
        for (const auto& row : disconnect) {
            body += io::format_double(row.t_sp) + "," + io::format_double(row.tau0) + "," +
                    io::format_double(row.computed_pct) + "," +
                    io::format_double(row.expected_pct) + "," + (row.pass ? "1" : "0") + "\n";
        }
        const fs::path out(out_dir);
        io::write_text_file(out / "tables.csv", body);
        io::write_manifest(out, {"tables", "", 0, out_dir});
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delayed-voltage-recovery lab: simulate, monitor, learn, mitigate"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonOpts opts;
    std::string param = "f_mD";
    std::vector<double> values;
    std::string measurements_path, utility_path, coeffs_path;
    std::string bus = "bus1", cluster = "c0", weights = "linear";
    double t_sp = 0.0, tau0 = 2.0;
    std::uint64_t seed_value = 0;

    auto* sim = app.add_subcommand("simulate", "Run one scenario and write its outputs");
    sim->add_option("--config", opts.config_path, "Scenario config JSON")->required();
    sim->add_option("--out", opts.out_dir, "Output directory")->required();
    auto* sim_seed = sim->add_option("--seed", seed_value, "Override the config seed");

    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write the table");
    sweep->add_option("--config", opts.config_path, "Scenario config JSON")->required();
    sweep->add_option("--param", param, "Swept parameter (f_mD)");
    sweep->add_option("--values", values, "Sweep values")->required()->delimiter(',');
    sweep->add_option("--out", opts.out_dir, "Output directory")->required();
    auto* sweep_seed = sweep->add_option("--seed", seed_value, "Override the config seed");

    auto* mon = app.add_subcommand("monitor", "Estimate recovery from a measurement stream");
    mon->add_option("measurements", measurements_path, "Measurement CSV ('-' for stdin)")
        ->required();
    mon->add_option("utility", utility_path, "Utility data JSON")->required();
    mon->add_option("--out", opts.out_dir, "Optional output directory");

    auto* learn = app.add_subcommand("learn", "Fit the linear recovery-time model");
    learn->add_option("sweep", measurements_path, "Sweep table CSV")->required();
    learn->add_option("--coeffs", coeffs_path, "Coefficient store JSON to write")->required();
    learn->add_option("--bus", bus, "Bus identifier");
    learn->add_option("--cluster", cluster, "Contingency cluster identifier");
    learn->add_option("--weights", weights, "uniform|linear|quadratic");

    auto* mit = app.add_subcommand("mitigate", "Plan and apply a disconnection");
    mit->add_option("--config", opts.config_path, "Scenario config JSON")->required();
    mit->add_option("--coeffs", coeffs_path, "Coefficient store JSON")->required();
    mit->add_option("--tsp", t_sp, "Specified recovery time [s]")->required();
    mit->add_option("--tau0", tau0, "Actuation delay after stall onset [s]");
    mit->add_option("--bus", bus, "Bus identifier");
    mit->add_option("--cluster", cluster, "Contingency cluster identifier");
    mit->add_option("--out", opts.out_dir, "Output directory")->required();
    auto* mit_seed = mit->add_option("--seed", seed_value, "Override the config seed");

    auto* tables = app.add_subcommand("tables", "Recompute the bundled reference tables");
    tables->add_option("--out", opts.out_dir, "Optional output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (sim->parsed()) {
            if (sim_seed->count() > 0) opts.seed = seed_value;
            return cmd_simulate(opts);
        }
        if (sweep->parsed()) {
            if (sweep_seed->count() > 0) opts.seed = seed_value;
            return cmd_sweep(opts, param, values);
        }
        if (mon->parsed()) return cmd_monitor(measurements_path, utility_path, opts.out_dir);
        if (learn->parsed()) {
            return cmd_learn(measurements_path, coeffs_path, bus, cluster, weights);
        }
        if (mit->parsed()) {
            if (mit_seed->count() > 0) opts.seed = seed_value;
            return cmd_mitigate(opts, coeffs_path, t_sp, tau0, bus, cluster);
        }
        if (tables->parsed()) return cmd_tables(opts.out_dir);
    } catch (const ValidationError& e) {
        log::error(e.what());
        return kExitValidation;
    } catch (const Error& e) {
        log::error(e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        log::error(e.what());
        return kExitRuntime;
    }
    return 0;
}
