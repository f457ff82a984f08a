#include "fidvr/io.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fidvr/errors.hpp"
#include "fidvr/version.hpp"

namespace fidvr::io {

using json = nlohmann::ordered_json;

std::string format_double(double value) {
    char buf[32];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, result.ptr);
}

namespace {

double parse_double(std::string_view text, const char* context) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto result = std::from_chars(first, last, value);
    if (result.ec != std::errc{} || result.ptr != last) {
        throw ValidationError(context, "not a number: '" + std::string(text) + "'");
    }
    return value;
}

double get_number(const json& j, const std::string& path, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw ValidationError(path + "." + key, "missing required field");
    if (!it->is_number()) throw ValidationError(path + "." + key, "must be a number");
    return it->get<double>();
}

double get_number_or(const json& j, const std::string& path, const char* key,
                     double fallback) {
    const auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw ValidationError(path + "." + key, "must be a number");
    return it->get<double>();
}

Admittance admittance_from_json(const json& j, const std::string& path) {
    if (!j.is_object()) throw ValidationError(path, "must be an object");
    if (j.contains("r") || j.contains("x")) {
        const double r = get_number_or(j, path, "r", 0.0);
        const double x = get_number_or(j, path, "x", 0.0);
        if (r == 0.0 && x == 0.0) throw ValidationError(path, "impedance must be nonzero");
        return Admittance::from_impedance(r, x);
    }
    if (j.contains("g") || j.contains("b")) {
        return Admittance::from_load(get_number_or(j, path, "g", 0.0),
                                     get_number_or(j, path, "b", 0.0));
    }
    throw ValidationError(path, "expected {r, x} or {g, b}");
}

json admittance_to_json(Admittance y) {
    return json{{"g", y.g_load()}, {"b", y.b_load()}};
}

json parse_json(const std::string& text, const char* context) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ValidationError(context, "invalid JSON");
    return j;
}

void check_schema_version(const json& j, const std::string& path) {
    const auto it = j.find("schema_version");
    if (it == j.end()) return;  // tolerated for hand-written files
    if (!it->is_number_integer() || it->get<int>() != kSchemaVersion) {
        throw ValidationError(path + ".schema_version",
                              "unsupported version (expected " +
                                  std::to_string(kSchemaVersion) + ")");
    }
}

ThermalRelayParams relay_from_json(const json& j, const std::string& path) {
    ThermalRelayParams relay;
    relay.theta1 = get_number_or(j, path, "theta1", relay.theta1);
    relay.theta2 = get_number_or(j, path, "theta2", relay.theta2);
    relay.t_th = get_number_or(j, path, "t_th", relay.t_th);
    return relay;
}

json relay_to_json(const ThermalRelayParams& relay) {
    return json{{"theta1", relay.theta1}, {"theta2", relay.theta2}, {"t_th", relay.t_th}};
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
    const json j = parse_json(text, "config");
    check_schema_version(j, "config");

    ScenarioConfig config;
    if (const auto it = j.find("network"); it != j.end()) {
        const json& n = *it;
        config.net.e_source = get_number_or(n, "network", "e_source", config.net.e_source);
        if (n.contains("y_trans"))
            config.net.y_trans = admittance_from_json(n["y_trans"], "network.y_trans");
        if (n.contains("y_fd")) config.net.y_fd = admittance_from_json(n["y_fd"], "network.y_fd");
        if (const auto f = n.find("fault"); f != n.end()) {
            config.net.fault.t_apply =
                get_number_or(*f, "network.fault", "t_apply", config.net.fault.t_apply);
            config.net.fault.duration =
                get_number_or(*f, "network.fault", "duration", config.net.fault.duration);
            config.net.fault.g_fault =
                get_number_or(*f, "network.fault", "g_fault", config.net.fault.g_fault);
        } else {
            config.net.fault.duration = 0.0;
        }
    }
    if (const auto it = j.find("load"); it != j.end()) {
        const json& l = *it;
        CompositeLoadSpec& load = config.load;
        load.p_load_nom = get_number_or(l, "load", "p_load_nom", load.p_load_nom);
        load.f_mA = get_number_or(l, "load", "f_mA", load.f_mA);
        load.f_mB = get_number_or(l, "load", "f_mB", load.f_mB);
        load.f_mC = get_number_or(l, "load", "f_mC", load.f_mC);
        load.f_elec = get_number_or(l, "load", "f_elec", load.f_elec);
        load.f_st = get_number_or(l, "load", "f_st", load.f_st);
        load.f_mD = get_number_or(l, "load", "f_mD", load.f_mD);
        load.f_stZ = get_number_or(l, "load", "f_stZ", load.f_stZ);
        load.f_stI = get_number_or(l, "load", "f_stI", load.f_stI);
        load.f_stP = get_number_or(l, "load", "f_stP", load.f_stP);
        load.q_over_p_abce = get_number_or(l, "load", "q_over_p_abce", load.q_over_p_abce);
        load.q_over_p_stat = get_number_or(l, "load", "q_over_p_stat", load.q_over_p_stat);
        load.q_over_p_mD_running =
            get_number_or(l, "load", "q_over_p_mD_running", load.q_over_p_mD_running);
        load.g_stall_m = get_number_or(l, "load", "g_stall_m", load.g_stall_m);
        load.b_stall_m = get_number_or(l, "load", "b_stall_m", load.b_stall_m);
        if (l.contains("relay")) load.relay = relay_from_json(l["relay"], "load.relay");
        load.v_stall_threshold =
            get_number_or(l, "load", "v_stall_threshold", load.v_stall_threshold);
        load.t_stall_dwell = get_number_or(l, "load", "t_stall_dwell", load.t_stall_dwell);
    }
    config.t_end = get_number_or(j, "config", "t_end", config.t_end);
    config.dt_sim = get_number_or(j, "config", "dt_sim", config.dt_sim);
    config.pmu_rate = get_number_or(j, "config", "pmu_rate", config.pmu_rate);
    if (const auto it = j.find("oscillation"); it != j.end() && !it->is_null()) {
        OscillationSpec osc;
        osc.amplitude = get_number_or(*it, "oscillation", "amplitude", osc.amplitude);
        osc.frequency = get_number_or(*it, "oscillation", "frequency", osc.frequency);
        osc.damping = get_number_or(*it, "oscillation", "damping", osc.damping);
        osc.phase = get_number_or(*it, "oscillation", "phase", osc.phase);
        config.oscillation = osc;
    }
    if (const auto it = j.find("actuation"); it != j.end() && !it->is_null()) {
        ActuationSpec act;
        act.tau0 = get_number(*it, "actuation", "tau0");
        act.gamma = get_number(*it, "actuation", "gamma");
        config.actuation = act;
    }
    config.noise_sigma = get_number_or(j, "config", "noise_sigma", config.noise_sigma);
    if (const auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned() && !it->is_number_integer()) {
            throw ValidationError("config.seed", "must be an integer");
        }
        config.seed = it->get<std::uint64_t>();
    }
    config.validate();
    return config;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    return parse_scenario_config(read_text_file(path));
}

std::string scenario_config_to_json(const ScenarioConfig& config) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["network"] = {{"e_source", config.net.e_source},
                    {"y_trans", admittance_to_json(config.net.y_trans)},
                    {"y_fd", admittance_to_json(config.net.y_fd)},
                    {"fault",
                     {{"t_apply", config.net.fault.t_apply},
                      {"duration", config.net.fault.duration},
                      {"g_fault", config.net.fault.g_fault}}}};
    const CompositeLoadSpec& load = config.load;
    j["load"] = {{"p_load_nom", load.p_load_nom},
                 {"f_mA", load.f_mA},
                 {"f_mB", load.f_mB},
                 {"f_mC", load.f_mC},
                 {"f_elec", load.f_elec},
                 {"f_st", load.f_st},
                 {"f_mD", load.f_mD},
                 {"f_stZ", load.f_stZ},
                 {"f_stI", load.f_stI},
                 {"f_stP", load.f_stP},
                 {"q_over_p_abce", load.q_over_p_abce},
                 {"q_over_p_stat", load.q_over_p_stat},
                 {"q_over_p_mD_running", load.q_over_p_mD_running},
                 {"g_stall_m", load.g_stall_m},
                 {"b_stall_m", load.b_stall_m},
                 {"relay", relay_to_json(load.relay)},
                 {"v_stall_threshold", load.v_stall_threshold},
                 {"t_stall_dwell", load.t_stall_dwell}};
    j["t_end"] = config.t_end;
    j["dt_sim"] = config.dt_sim;
    j["pmu_rate"] = config.pmu_rate;
    if (config.oscillation) {
        j["oscillation"] = {{"amplitude", config.oscillation->amplitude},
                            {"frequency", config.oscillation->frequency},
                            {"damping", config.oscillation->damping},
                            {"phase", config.oscillation->phase}};
    }
    if (config.actuation) {
        j["actuation"] = {{"tau0", config.actuation->tau0},
                          {"gamma", config.actuation->gamma}};
    }
    j["noise_sigma"] = config.noise_sigma;
    j["seed"] = config.seed;
    return j.dump(2) + "\n";
}

UtilityData load_utility_data(const std::filesystem::path& path) {
    const json j = parse_json(read_text_file(path), "utility");
    check_schema_version(j, "utility");

    UtilityData data;
    const auto comp_it = j.find("composition");
    if (comp_it == j.end()) throw ValidationError("utility.composition", "missing");
    const json& c = *comp_it;
    data.composition.f_mA = get_number(c, "composition", "f_mA");
    data.composition.f_mB = get_number(c, "composition", "f_mB");
    data.composition.f_mC = get_number(c, "composition", "f_mC");
    data.composition.f_elec = get_number(c, "composition", "f_elec");
    data.composition.f_st = get_number(c, "composition", "f_st");
    data.composition.f_mD = get_number(c, "composition", "f_mD");
    data.composition.f_stZ = get_number(c, "composition", "f_stZ");
    data.composition.f_stI = get_number(c, "composition", "f_stI");
    data.composition.f_stP = get_number(c, "composition", "f_stP");
    data.composition.validate();

    if (!j.contains("y_fd")) throw ValidationError("utility.y_fd", "missing");
    data.y_fd = admittance_from_json(j["y_fd"], "utility.y_fd");
    if (!j.contains("relay")) throw ValidationError("utility.relay", "missing");
    data.relay = relay_from_json(j["relay"], "utility.relay");
    data.relay.validate();

    if (const auto it = j.find("detect"); it != j.end()) {
        DetectParams& d = data.detect;
        d.v_dip = get_number_or(*it, "detect", "v_dip", d.v_dip);
        d.kappa = get_number_or(*it, "detect", "kappa", d.kappa);
        d.delta_abs = get_number_or(*it, "detect", "delta_abs", d.delta_abs);
        d.n_hold = static_cast<int>(get_number_or(*it, "detect", "n_hold", d.n_hold));
        d.baseline_window =
            get_number_or(*it, "detect", "baseline_window", d.baseline_window);
    }
    return data;
}

std::string utility_data_to_json(const UtilityData& data) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["composition"] = {{"f_mA", data.composition.f_mA},   {"f_mB", data.composition.f_mB},
                        {"f_mC", data.composition.f_mC},   {"f_elec", data.composition.f_elec},
                        {"f_st", data.composition.f_st},   {"f_mD", data.composition.f_mD},
                        {"f_stZ", data.composition.f_stZ}, {"f_stI", data.composition.f_stI},
                        {"f_stP", data.composition.f_stP}};
    j["y_fd"] = admittance_to_json(data.y_fd);
    j["relay"] = relay_to_json(data.relay);
    j["detect"] = {{"v_dip", data.detect.v_dip},
                   {"kappa", data.detect.kappa},
                   {"delta_abs", data.detect.delta_abs},
                   {"n_hold", data.detect.n_hold},
                   {"baseline_window", data.detect.baseline_window}};
    return j.dump(2) + "\n";
}

UtilityData utility_data_from_config(const ScenarioConfig& config) {
    UtilityData data;
    data.composition = CompositionInfo::from_load_spec(config.load);
    data.y_fd = config.net.y_fd;
    data.relay = config.load.relay;
    return data;
}

namespace {

void append_row(std::string& out, std::span<const double> values) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k > 0) out.push_back(',');
        out += format_double(values[k]);
    }
    out.push_back('\n');
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

void write_measurements_csv(const std::filesystem::path& path,
                            std::span<const MeasurementSample> samples) {
    std::string out(kMeasurementHeader);
    out.push_back('\n');
    for (const auto& s : samples) {
        append_row(out, std::array{s.t, std::abs(s.v0), std::arg(s.v0), std::abs(s.i),
                                   std::arg(s.i), s.p(), s.q(), s.g(), s.b()});
    }
    write_text_file(path, out);
}

std::vector<MeasurementSample> read_measurements_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("measurements", "empty stream");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kMeasurementHeader) {
        throw ValidationError("measurements.header", "expected '" +
                                                         std::string(kMeasurementHeader) +
                                                         "', got '" + line + "'");
    }
    std::vector<MeasurementSample> samples;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 9) {
            throw ValidationError("measurements.row" + std::to_string(row),
                                  "expected 9 columns, got " + std::to_string(fields.size()));
        }
        const char* ctx = "measurements.value";
        MeasurementSample s;
        s.t = parse_double(fields[0], ctx);
        s.v0 = std::polar(parse_double(fields[1], ctx), parse_double(fields[2], ctx));
        s.i = std::polar(parse_double(fields[3], ctx), parse_double(fields[4], ctx));
        samples.push_back(s);
    }
    return samples;
}

std::vector<MeasurementSample> read_measurements_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("measurements", "cannot open " + path.string());
    return read_measurements_csv(in);
}

void write_ground_truth_csv(const std::filesystem::path& path, const TrajectoryRecord& rec) {
    std::string out = "t,v_i_mag,v0_mag,theta,f_th,gamma_c,g_load,b_load,g_abce,g_static,"
                      "g_motor_d\n";
    for (std::size_t k = 0; k < rec.steps(); ++k) {
        append_row(out, std::array{rec.t[k], std::abs(rec.v_i[k]), std::abs(rec.v0[k]),
                                   rec.theta[k], rec.f_th[k], rec.gamma_c[k], rec.g_load[k],
                                   rec.b_load[k], rec.g_abce[k], rec.g_static[k],
                                   rec.g_motor_d[k]});
    }
    write_text_file(path, out);
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const SweepRow> rows) {
    std::string out(kSweepHeader);
    out.push_back('\n');
    for (const auto& r : rows) {
        append_row(out, std::array{r.f_mD, r.delta_g, r.t1_actual, r.t2_actual, r.t1_est,
                                   r.t2_est, r.g_stall_true, r.g_stall_est});
    }
    write_text_file(path, out);
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("sweep", "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("sweep", "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSweepHeader) {
        throw ValidationError("sweep.header",
                              "expected '" + std::string(kSweepHeader) + "', got '" + line + "'");
    }
    std::vector<SweepRow> rows;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 8) {
            throw ValidationError("sweep.row" + std::to_string(n), "expected 8 columns");
        }
        const char* ctx = "sweep.value";
        SweepRow r;
        r.f_mD = parse_double(fields[0], ctx);
        r.delta_g = parse_double(fields[1], ctx);
        r.t1_actual = parse_double(fields[2], ctx);
        r.t2_actual = parse_double(fields[3], ctx);
        r.t1_est = parse_double(fields[4], ctx);
        r.t2_est = parse_double(fields[5], ctx);
        r.g_stall_true = parse_double(fields[6], ctx);
        r.g_stall_est = parse_double(fields[7], ctx);
        rows.push_back(r);
    }
    return rows;
}

namespace {

json optional_to_json(const std::optional<double>& value) {
    if (!value) return nullptr;
    return *value;
}

}  // namespace

std::string scenario_report_to_json(const ScenarioReport& report) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["status"] = report.stalled ? "fidvr" : "normal_recovery";
    j["onset_t"] = optional_to_json(report.onset_t);
    j["baseline_g"] = report.baseline_g;
    j["plateau_delta_g"] = optional_to_json(report.plateau_delta_g);
    j["t1_actual"] = optional_to_json(report.t1_actual);
    j["t2_actual"] = optional_to_json(report.t2_actual);
    j["final_voltage"] = report.final_voltage;
    return j.dump(2) + "\n";
}

std::string recovery_estimate_to_json(const std::optional<RecoveryEstimate>& estimate) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["event_detected"] = estimate.has_value();
    if (estimate) {
        j["onset_t"] = estimate->onset_t;
        j["delta_g"] = estimate->delta_g;
        j["v_pre"] = estimate->v_pre;
        j["v_post"] = estimate->v_post;
        j["g_stall_sys"] = estimate->g_stall_sys;
        j["b_stall_sys"] = estimate->b_stall_sys;
        j["g_stall_motor_base"] = estimate->g_stall_m;
        j["t1_est"] = optional_to_json(estimate->t1_est);
        j["t2_est"] = optional_to_json(estimate->t2_est);
        j["total_est"] = optional_to_json(estimate->total_est);
        j["flags"] = {{"no_trip", estimate->no_trip},
                      {"non_recovering", estimate->non_recovering},
                      {"composition_mismatch", estimate->composition_mismatch}};
    }
    return j.dump(2) + "\n";
}

std::string mitigation_plan_to_json(const MitigationPlan& plan) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["t_sp"] = plan.t_sp;
    j["tau0"] = plan.tau0;
    j["g0"] = plan.g0;
    j["gamma"] = plan.gamma;
    j["disconnect_fraction"] = plan.disconnect_fraction;
    j["predicted_t1"] = plan.predicted_t1;
    j["predicted_t2"] = plan.predicted_t2;
    j["control_needed"] = plan.control_needed;
    j["ambiguous"] = plan.ambiguous;
    j["infeasible_timing"] = plan.infeasible_timing;
    j["actuated_after_recovery"] = plan.actuated_after_recovery;
    j["achieved_t1"] = optional_to_json(plan.achieved_t1);
    j["achieved_t2"] = optional_to_json(plan.achieved_t2);
    j["achieved_total"] = optional_to_json(plan.achieved_total);
    return j.dump(2) + "\n";
}

CoeffStore load_coeff_store(const std::filesystem::path& path) {
    const json j = parse_json(read_text_file(path), "coeffs");
    check_schema_version(j, "coeffs");
    CoeffStore store;
    const auto it = j.find("entries");
    if (it == j.end() || !it->is_array()) {
        throw ValidationError("coeffs.entries", "missing or not an array");
    }
    for (const auto& entry : *it) {
        LinearCoeffs coeffs;
        coeffs.bus_id = entry.value("bus_id", std::string("bus1"));
        coeffs.cluster_id = entry.value("cluster_id", std::string("c0"));
        coeffs.alpha0 = get_number(entry, "coeffs.entry", "alpha0");
        coeffs.alpha1 = get_number(entry, "coeffs.entry", "alpha1");
        coeffs.beta0 = get_number(entry, "coeffs.entry", "beta0");
        coeffs.beta1 = get_number(entry, "coeffs.entry", "beta1");
        coeffs.diag.r2_t1 = get_number_or(entry, "coeffs.entry", "r2_t1", 0.0);
        coeffs.diag.r2_t2 = get_number_or(entry, "coeffs.entry", "r2_t2", 0.0);
        coeffs.diag.n_samples = static_cast<std::size_t>(
            get_number_or(entry, "coeffs.entry", "n_samples", 0.0));
        store.put(coeffs);
    }
    return store;
}

void save_coeff_store(const std::filesystem::path& path, const CoeffStore& store) {
    json entries = json::array();
    for (const auto& c : store.all()) {
        entries.push_back({{"bus_id", c.bus_id},
                           {"cluster_id", c.cluster_id},
                           {"alpha0", c.alpha0},
                           {"alpha1", c.alpha1},
                           {"beta0", c.beta0},
                           {"beta1", c.beta1},
                           {"r2_t1", c.diag.r2_t1},
                           {"r2_t2", c.diag.r2_t2},
                           {"n_samples", c.diag.n_samples}});
    }
    json j;
    j["schema_version"] = kSchemaVersion;
    j["entries"] = entries;
    write_text_file(path, j.dump(2) + "\n");
}

void write_manifest(const std::filesystem::path& out_dir, const RunManifest& manifest) {
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);

    json j;
    j["schema_version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["command"] = manifest.command;
    j["config_path"] = manifest.config_path;
    j["seed"] = manifest.seed;
    j["out_dir"] = manifest.out_dir;
    j["timestamp"] = stamp;
    write_text_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace fidvr::io
