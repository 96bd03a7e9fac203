#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rydtwin/detail/toml.hpp"
#include "rydtwin/errors.hpp"
#include "rydtwin/experiments.hpp"

namespace rydtwin {

/// Parsed scenario configuration file. Unknown tables or keys are rejected.
class ConfigFile {
  public:
    static ConfigFile from_string(const std::string& text) {
        ConfigFile cfg;
        cfg.doc_ = detail::TomlParser::parse(text);
        cfg.validate_schema();
        return cfg;
    }

    static ConfigFile from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw config_error("cannot open config file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str());
    }

    bool has(const std::string& table, const std::string& key) const {
        auto t = doc_.find(table);
        return t != doc_.end() && t->second.count(key) > 0;
    }

    double num(const std::string& table, const std::string& key, double fallback) const {
        if (!has(table, key)) return fallback;
        return doc_.at(table).at(key).as_number(table + "." + key);
    }

    std::string str(const std::string& table, const std::string& key,
                    const std::string& fallback) const {
        if (!has(table, key)) return fallback;
        return doc_.at(table).at(key).as_string(table + "." + key);
    }

    std::vector<double> num_list(const std::string& table, const std::string& key,
                                 std::vector<double> fallback = {}) const {
        if (!has(table, key)) return fallback;
        const auto& arr = doc_.at(table).at(key).as_array(table + "." + key);
        std::vector<double> out;
        for (const auto& v : arr) out.push_back(v.as_number(table + "." + key));
        return out;
    }

    /// Array of [x, y] pairs, e.g. the tau calibration table.
    std::vector<std::pair<double, double>> pair_list(const std::string& table,
                                                     const std::string& key) const {
        std::vector<std::pair<double, double>> out;
        if (!has(table, key)) return out;
        const auto& arr = doc_.at(table).at(key).as_array(table + "." + key);
        for (const auto& v : arr) {
            const auto& pair = v.as_array(table + "." + key);
            if (pair.size() != 2)
                throw config_error("config: " + table + "." + key + " entries must be [x, y] pairs");
            out.emplace_back(pair[0].as_number(key), pair[1].as_number(key));
        }
        return out;
    }

  private:
    detail::TomlDocument doc_;

    static const std::map<std::string, std::set<std::string>>& schema() {
        static const std::map<std::string, std::set<std::string>> s = {
            {"", {}},
            {"scenario", {"seed", "fs_hz", "duration_s"}},
            {"cell", {"kind", "tau_points", "radius_cm"}},
            {"eit",
             {"linewidth_fwhm_mhz", "peak_voltage_v", "weights", "alphas", "rabi_probe_hz",
              "rabi_coupling_hz"}},
            {"operating_point", {"e_aux_v_per_cm", "delta_p_mhz", "f_mod_hz"}},
            {"signal", {"kind", "amplitude_v_per_cm", "frequency_hz", "phase_rad", "start_time_s"}},
            {"coupling", {"kappa", "mode"}},
            {"noise", {"white_nsd", "flicker_exponent", "flicker_nsd_at_1hz"}},
            {"demod", {"reference", "phase_rad", "lpf_cutoff_hz", "lpf_order"}},
            {"stark_map", {"field_min", "field_max", "points"}},
            {"transient", {"step_v_per_cm", "duration_s", "fs_hz"}},
            {"detuning_map",
             {"detuning_min_mhz", "detuning_max_mhz", "points", "step_v_per_cm", "duration_s",
              "fs_hz"}},
            {"grid",
             {"e_aux_min", "e_aux_max", "e_aux_points", "delta_p_min", "delta_p_max",
              "delta_p_points"}},
            {"responsivity", {"frequency_hz", "amplitude_min", "amplitude_max", "points"}},
            {"direct", {"frequency_hz", "amplitude_v_per_cm", "delta_p_mhz"}},
            {"sensitivity",
             {"frequencies", "m_values", "lia_anchor_at_1hz", "lia_exponent", "lia_eval",
              "nsd_pd_table"}},
            {"noise_gen", {"kind", "fs_hz", "samples"}},
            {"dipole", {"s0", "f0_hz", "exponent"}},
        };
        return s;
    }

    void validate_schema() const {
        for (const auto& [table, entries] : doc_) {
            auto it = schema().find(table);
            if (it == schema().end()) throw config_error("config: unknown table [" + table + "]");
            for (const auto& [key, value] : entries)
                if (!it->second.count(key))
                    throw config_error("config: unknown key '" + key + "' in [" + table + "]");
        }
    }
};

inline Scenario scenario_from_config(const ConfigFile& cfg) {
    Scenario s;
    s.seed = static_cast<std::uint64_t>(cfg.num("scenario", "seed", 1.0));
    s.fs_hz = cfg.num("scenario", "fs_hz", 0.0);
    s.duration_s = cfg.num("scenario", "duration_s", 0.0);

    const std::string cell_kind = cfg.str("cell", "kind", "paraffin");
    if (cell_kind == "paraffin")
        s.cell = paraffin_cell();
    else if (cell_kind == "uncoated")
        s.cell = uncoated_cell();
    else
        throw config_error("config: cell.kind must be 'paraffin' or 'uncoated'");
    if (cfg.has("cell", "tau_points")) {
        s.cell.tau_points.clear();
        for (const auto& [e, tau] : cfg.pair_list("cell", "tau_points"))
            s.cell.tau_points.push_back({e, tau});
    }
    s.cell.radius_cm = cfg.num("cell", "radius_cm", s.cell.radius_cm);

    s.eit.linewidth_fwhm_mhz = cfg.num("eit", "linewidth_fwhm_mhz", s.eit.linewidth_fwhm_mhz);
    s.eit.peak_voltage_v = cfg.num("eit", "peak_voltage_v", s.eit.peak_voltage_v);
    const auto weights = cfg.num_list("eit", "weights");
    const auto alphas = cfg.num_list("eit", "alphas");
    if (!weights.empty() || !alphas.empty()) {
        if (weights.size() != s.eit.branches.size() || alphas.size() != s.eit.branches.size())
            throw config_error("config: eit.weights/alphas must list all three branches");
        for (std::size_t i = 0; i < s.eit.branches.size(); ++i) {
            s.eit.branches[i].weight = weights[i];
            s.eit.branches[i].alpha_mhz_cm2_v2 = alphas[i];
        }
    }

    s.op.e_aux_v_per_cm = cfg.num("operating_point", "e_aux_v_per_cm", s.op.e_aux_v_per_cm);
    s.op.delta_p_mhz = cfg.num("operating_point", "delta_p_mhz", s.op.delta_p_mhz);
    s.op.f_mod_hz = cfg.num("operating_point", "f_mod_hz", 0.0);

    const std::string sig_kind = cfg.str("signal", "kind", "sine");
    if (sig_kind == "sine")
        s.signal.kind = FieldSource::Kind::sine;
    else if (sig_kind == "square")
        s.signal.kind = FieldSource::Kind::square;
    else if (sig_kind == "dc_step")
        s.signal.kind = FieldSource::Kind::dc_step;
    else
        throw config_error("config: signal.kind must be sine, square or dc_step");
    s.signal.amplitude_v_per_cm = cfg.num("signal", "amplitude_v_per_cm", 0.0437);
    s.signal.frequency_hz = cfg.num("signal", "frequency_hz", 10.0);
    s.signal.phase_rad = cfg.num("signal", "phase_rad", 0.0);
    s.signal.start_time_s = cfg.num("signal", "start_time_s", 0.0);

    s.coupling.kappa = cfg.num("coupling", "kappa", 0.1);
    const std::string mode = cfg.str("coupling", "mode", "projected");
    if (mode == "projected")
        s.coupling.mode = CouplingModel::Mode::projected;
    else if (mode == "magnitude")
        s.coupling.mode = CouplingModel::Mode::magnitude;
    else
        throw config_error("config: coupling.mode must be 'projected' or 'magnitude'");

    s.noise.white_nsd = cfg.num("noise", "white_nsd", 0.0);
    s.noise.flicker_exponent = cfg.num("noise", "flicker_exponent", 0.7);
    s.noise.flicker_nsd_at_1hz = cfg.num("noise", "flicker_nsd_at_1hz", 0.0);

    const std::string ref = cfg.str("demod", "reference", "sine");
    if (ref == "sine")
        s.demod.reference = DemodConfig::Reference::sine;
    else if (ref == "square")
        s.demod.reference = DemodConfig::Reference::square;
    else
        throw config_error("config: demod.reference must be 'sine' or 'square'");
    s.demod.phase_rad = cfg.num("demod", "phase_rad", 0.0);
    s.demod.lpf_cutoff_hz = cfg.num("demod", "lpf_cutoff_hz", 0.0);
    s.demod.lpf_order = static_cast<int>(cfg.num("demod", "lpf_order", 4.0));

    return s;
}

inline NsdSchedule nsd_schedule_from_config(const ConfigFile& cfg) {
    NsdSchedule schedule;
    schedule.lia_anchor_at_1hz = cfg.num("sensitivity", "lia_anchor_at_1hz", 0.0);
    schedule.lia_exponent = cfg.num("sensitivity", "lia_exponent", 0.7);
    const std::string eval = cfg.str("sensitivity", "lia_eval", "signal");
    if (eval == "signal")
        schedule.lia_eval = NsdSchedule::LiaEval::at_signal_frequency;
    else if (eval == "fmod")
        schedule.lia_eval = NsdSchedule::LiaEval::at_fmod;
    else
        throw config_error("config: sensitivity.lia_eval must be 'signal' or 'fmod'");
    if (cfg.has("sensitivity", "nsd_pd_table")) {
        schedule.nsd_pd_per_fmod.clear();
        for (const auto& [fm, nsd] : cfg.pair_list("sensitivity", "nsd_pd_table"))
            schedule.nsd_pd_per_fmod.emplace_back(fm, nsd);
    }
    return schedule;
}

} // namespace rydtwin
