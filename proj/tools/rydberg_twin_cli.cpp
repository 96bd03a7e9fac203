// Command-line front end of the electrometer digital twin. Every subcommand
// reads an optional TOML scenario config, writes CSV data plus a JSON report
// (resolved scenario embedded) into --out, and exits nonzero with a JSON
// error record on failure.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rydtwin/report.hpp"
#include "rydtwin/rydtwin.hpp"

namespace fs = std::filesystem;
using namespace rydtwin;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0; // 0 = keep config value
    unsigned threads = 0;
    bool has_seed = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "TOML scenario config file");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_option("--seed", opts.seed, "override the scenario seed")
        ->each([&](const std::string&) { opts.has_seed = true; });
    cmd->add_option("--threads", opts.threads, "worker count (overrides RYDBERG_TWIN_THREADS)");
}

ConfigFile load_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) return ConfigFile::from_string("");
    return ConfigFile::from_file(opts.config_path);
}

Scenario load_scenario(const ConfigFile& cfg, const CommonOpts& opts) {
    Scenario s = scenario_from_config(cfg);
    if (opts.has_seed) s.seed = opts.seed;
    return s;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = (n == 1) ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    auto v = linspace(std::log10(lo), std::log10(hi), n);
    for (auto& x : v) x = std::pow(10.0, x);
    return v;
}

void emit(const fs::path& dir, const std::string& stem, const std::string& csv,
          const json& report) {
    fs::create_directories(dir);
    write_text_file((dir / (stem + ".csv")).string(), csv);
    write_text_file((dir / (stem + ".json")).string(), report.dump(2) + "\n");
    std::cout << stem << "\n";
}

int cmd_stark_map(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    const Scenario s = load_scenario(cfg, opts);
    const double lo = cfg.num("stark_map", "field_min", 0.0);
    const double hi = cfg.num("stark_map", "field_max", 0.38);
    const auto n = static_cast<std::size_t>(cfg.num("stark_map", "points", 381.0));
    const StarkMap map = stark_map(linspace(lo, hi, n), s.eit.branches);

    std::ostringstream csv;
    write_stark_map_csv(map, csv);
    json report;
    report["subcommand"] = "stark-map";
    report["tag"] = kTagPaperConsistency;
    report["scenario"] = scenario_to_json(resolve(s));
    report["field_axis"] = {{"min", lo}, {"max", hi}, {"points", n}};
    emit(opts.out_dir, report_stem("stark-map", report["scenario"]), csv.str(), report);
    return 0;
}

int cmd_transient(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    const Scenario s = load_scenario(cfg, opts);
    const double step = cfg.num("transient", "step_v_per_cm", 0.354);
    const double tau = tau_for_amplitude(s.cell, std::abs(step));
    const double duration = cfg.num("transient", "duration_s", 10.0 * tau);
    const double fs = cfg.num("transient", "fs_hz", 100.0 * 0.6931471805599453 / tau);

    const auto n = static_cast<std::size_t>(std::llround(duration * fs));
    FieldSource src{FieldSource::Kind::dc_step, step, 0.0, 0.0, 0.0};
    const TimeSeries applied = sample_source(src, fs, n);
    ScreeningState state;
    const TimeSeries internal = screen(applied, s.cell, state);

    std::ostringstream csv;
    write_transient_csv(applied, internal, csv);
    json report;
    report["subcommand"] = "transient";
    report["tag"] = kTagPaperConsistency;
    report["scenario"] = scenario_to_json(resolve(s));
    report["step_v_per_cm"] = step;
    report["tau_half_s"] = tau;
    emit(opts.out_dir, report_stem("transient", report["scenario"]), csv.str(), report);
    return 0;
}

int cmd_detuning_map(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    const Scenario s = load_scenario(cfg, opts);
    const double lo = cfg.num("detuning_map", "detuning_min_mhz", 0.0);
    const double hi = cfg.num("detuning_map", "detuning_max_mhz", 320.0);
    const auto n = static_cast<std::size_t>(cfg.num("detuning_map", "points", 321.0));
    const double step = cfg.num("detuning_map", "step_v_per_cm", 0.354);
    const double tau = tau_for_amplitude(s.cell, std::abs(step));
    const double duration = cfg.num("detuning_map", "duration_s", 10.0 * tau);
    const double fs = cfg.num("detuning_map", "fs_hz", 100.0 * 0.6931471805599453 / tau);

    const auto map = detuning_transient_map(linspace(lo, hi, n), step, s.eit, s.cell, duration, fs);
    std::ostringstream csv;
    write_detuning_map_csv(map, csv);
    json report;
    report["subcommand"] = "detuning-map";
    report["tag"] = kTagModelRelative;
    report["scenario"] = scenario_to_json(resolve(s));
    report["step_v_per_cm"] = step;
    report["ridge_collapse_time_s"] = ridge_collapse_time(map, s.eit.linewidth_fwhm_mhz);
    emit(opts.out_dir, report_stem("detuning-map", report["scenario"]), csv.str(), report);
    return 0;
}

int cmd_sense(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    const Scenario s = load_scenario(cfg, opts);
    const SensingResult res = run_sensing(s);
    if (res.fmod_below_floor)
        std::cerr << "warning: f_mod below the 4 kHz screening-window floor\n";

    std::ostringstream csv;
    write_series_csv(res.demod_v, "output_V", csv);
    json report;
    report["subcommand"] = "sense";
    report["tag"] = kTagModelRelative;
    report["scenario"] = scenario_to_json(res.scenario);
    report["fit"] = fit_to_json(res.fit);
    report["fmod_below_floor"] = res.fmod_below_floor;
    emit(opts.out_dir, report_stem("sense", report["scenario"]), csv.str(), report);
    return 0;
}

int cmd_grid_scan(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    Scenario s = load_scenario(cfg, opts);
    // S3 probe tone defaults: 10 Hz at 100 mV/cm.
    if (!cfg.has("signal", "frequency_hz")) s.signal.frequency_hz = 10.0;
    if (!cfg.has("signal", "amplitude_v_per_cm")) s.signal.amplitude_v_per_cm = 0.1;
    const auto e_axis = linspace(cfg.num("grid", "e_aux_min", 0.25), cfg.num("grid", "e_aux_max", 0.5),
                                 static_cast<std::size_t>(cfg.num("grid", "e_aux_points", 6.0)));
    const auto dp_axis =
        linspace(cfg.num("grid", "delta_p_min", 160.0), cfg.num("grid", "delta_p_max", 270.0),
                 static_cast<std::size_t>(cfg.num("grid", "delta_p_points", 12.0)));

    const OperatingGrid grid = grid_scan(e_axis, dp_axis, s, opts.threads);
    std::ostringstream csv;
    write_grid_csv(grid, csv);
    json report;
    report["subcommand"] = "grid-scan";
    report["tag"] = kTagModelRelative;
    report["scenario"] = scenario_to_json(resolve(s));
    report["argmax"] = {{"e_aux_v_per_cm", grid.e_aux_axis[grid.argmax_e]},
                        {"delta_p_mhz", grid.delta_p_axis[grid.argmax_dp]},
                        {"metric_v", grid.max_metric}};
    emit(opts.out_dir, report_stem("grid-scan", report["scenario"]), csv.str(), report);
    return 0;
}

int cmd_responsivity(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    const Scenario s = load_scenario(cfg, opts);
    const double f = cfg.num("responsivity", "frequency_hz", 10.0);
    const auto amplitudes =
        logspace(cfg.num("responsivity", "amplitude_min", 0.01),
                 cfg.num("responsivity", "amplitude_max", 20.0),
                 static_cast<std::size_t>(cfg.num("responsivity", "points", 10.0)));

    const ResponsivitySweep sweep = responsivity_sweep(f, amplitudes, s, opts.threads);
    std::ostringstream csv;
    csv << "input_V_per_cm,output_V\n";
    for (const auto& [a, y] : sweep.points) csv << fmt_num(a) << "," << fmt_num(y) << "\n";
    json report;
    report["subcommand"] = "responsivity";
    report["tag"] = kTagModelRelative;
    report["scenario"] = scenario_to_json(resolve(s));
    report["frequency_hz"] = f;
    report["fit"] = linear_fit_to_json(sweep.fit);
    emit(opts.out_dir, report_stem("responsivity", report["scenario"]), csv.str(), report);
    return 0;
}

int cmd_direct_sense(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    const Scenario s = load_scenario(cfg, opts);
    const double f = cfg.num("direct", "frequency_hz", 500.0);
    const double amp = cfg.num("direct", "amplitude_v_per_cm", 0.1);
    const double dp = cfg.num("direct", "delta_p_mhz", -7.0);

    const DirectSensingResult res = direct_sensing(f, amp, dp, s);
    std::ostringstream csv;
    write_series_csv(res.pd_v, "pd_V", csv);
    json report;
    report["subcommand"] = "direct-sense";
    report["tag"] = kTagModelRelative;
    report["scenario"] = scenario_to_json(resolve(s));
    report["frequency_hz"] = f;
    report["amplitude_v_per_cm"] = amp;
    report["delta_p_mhz"] = dp;
    report["fit"] = fit_to_json(res.fit);
    report["snr"] = res.snr;
    report["note"] = "quadratic Stark response: tone fitted at 2f";
    emit(opts.out_dir, report_stem("direct-sense", report["scenario"]), csv.str(), report);
    return 0;
}

int cmd_sensitivity_report(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    const Scenario s = load_scenario(cfg, opts);
    const auto freqs = cfg.num_list("sensitivity", "frequencies",
                                    {0.5, 1, 2, 5, 10, 20, 100, 200, 1000, 10000});
    const auto m_values = cfg.num_list("sensitivity", "m_values");
    if (m_values.empty())
        throw config_error("sensitivity-report: sensitivity.m_values is required");
    const NsdSchedule schedule = nsd_schedule_from_config(cfg);

    DipoleBaseline dipole;
    dipole.s0_v_per_cm_sqrthz = cfg.num("dipole", "s0", dipole.s0_v_per_cm_sqrthz);
    dipole.f0_hz = cfg.num("dipole", "f0_hz", dipole.f0_hz);
    dipole.exponent = cfg.num("dipole", "exponent", dipole.exponent);

    const SensitivityReport rep = sensitivity_report(freqs, m_values, schedule);
    std::ostringstream csv;
    write_sensitivity_csv(rep, csv);
    json report;
    report["subcommand"] = "sensitivity-report";
    report["tag"] = kTagPaperConsistency;
    report["scenario"] = scenario_to_json(resolve(s));
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"f_hz", r.f_hz},
                        {"f_mod_hz", r.f_mod_hz},
                        {"m", r.responsivity},
                        {"nsd_total", r.nsd_total},
                        {"s_e", r.sensitivity}});
    report["rows"] = rows;
    json baseline = json::array();
    for (const auto& r : rep.rows)
        baseline.push_back({{"f_hz", r.f_hz},
                            {"s_e_dipole", dipole_baseline(r.f_hz, dipole)},
                            {"tag", kTagModelRelative}});
    report["dipole_baseline"] = baseline;
    emit(opts.out_dir, report_stem("sensitivity-report", report["scenario"]), csv.str(), report);
    return 0;
}

int cmd_noise_gen(const CommonOpts& opts) {
    const ConfigFile cfg = load_config(opts);
    const Scenario s = load_scenario(cfg, opts);
    const std::string kind = cfg.str("noise_gen", "kind", "white");
    const double fs = cfg.num("noise_gen", "fs_hz", 1.0e6);
    const auto n = static_cast<std::size_t>(cfg.num("noise_gen", "samples", 1048576.0));

    TimeSeries trace;
    if (kind == "white")
        trace = white_noise(s.noise.white_nsd, fs, n, s.seed);
    else if (kind == "flicker")
        trace = flicker_noise(s.noise, fs, n, s.seed);
    else
        throw config_error("noise-gen: kind must be 'white' or 'flicker'");

    const AsdEstimate est = estimate_asd(trace, std::min<std::size_t>(4096, n), 0.5);
    std::ostringstream csv;
    write_asd_csv(est, csv);
    json report;
    report["subcommand"] = "noise-gen";
    report["tag"] = kTagPaperConsistency;
    report["scenario"] = scenario_to_json(resolve(s));
    report["kind"] = kind;
    report["rbw_hz"] = est.rbw_hz;
    report["n_segments"] = est.n_segments;
    emit(opts.out_dir, report_stem("noise-gen", report["scenario"]), csv.str(), report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rydberg-atom low-frequency electrometer digital twin"};
    app.require_subcommand(1);

    std::map<std::string, std::function<int(const CommonOpts&)>> handlers = {
        {"stark-map", cmd_stark_map},
        {"transient", cmd_transient},
        {"detuning-map", cmd_detuning_map},
        {"grid-scan", cmd_grid_scan},
        {"sense", cmd_sense},
        {"responsivity", cmd_responsivity},
        {"direct-sense", cmd_direct_sense},
        {"sensitivity-report", cmd_sensitivity_report},
        {"noise-gen", cmd_noise_gen},
    };
    std::map<std::string, CommonOpts> opts;
    for (auto& [name, handler] : handlers) {
        CLI::App* cmd = app.add_subcommand(name);
        add_common(cmd, opts[name]);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        return handlers.at(name)(opts.at(name));
    } catch (const std::exception& e) {
        nlohmann::ordered_json err;
        err["error"] = true;
        err["subcommand"] = name;
        err["what"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
