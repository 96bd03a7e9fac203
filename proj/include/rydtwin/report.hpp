#pragma once

#include <string>

#include <json.hpp>

#include "rydtwin/detail/rng.hpp"
#include "rydtwin/experiments.hpp"
#include "rydtwin/io.hpp"

namespace rydtwin {

using json = nlohmann::ordered_json;

inline json branches_to_json(const std::vector<RydbergBranch>& branches) {
    json arr = json::array();
    for (const auto& b : branches)
        arr.push_back({{"mj", to_string(b.mj)},
                       {"alpha_mhz_cm2_v2", b.alpha_mhz_cm2_v2},
                       {"weight", b.weight}});
    return arr;
}

/// Resolved scenario, embedded in every report for provenance.
inline json scenario_to_json(const Scenario& s) {
    json j;
    j["seed"] = s.seed;
    j["rng"] = detail::kRngAlgorithm;
    j["fs_hz"] = s.fs_hz;
    j["duration_s"] = s.duration_s;
    j["cell"] = {{"kind", s.cell.kind == CellModel::Kind::paraffin ? "paraffin" : "uncoated"},
                 {"radius_cm", s.cell.radius_cm}};
    json taus = json::array();
    for (const auto& p : s.cell.tau_points) taus.push_back({p.field_v_per_cm, p.tau_half_s});
    j["cell"]["tau_points"] = taus;
    j["eit"] = {{"linewidth_fwhm_mhz", s.eit.linewidth_fwhm_mhz},
                {"peak_voltage_v", s.eit.peak_voltage_v},
                {"rabi_probe_rad_s", s.eit.rabi_probe_rad_s},
                {"rabi_coupling_rad_s", s.eit.rabi_coupling_rad_s},
                {"branches", branches_to_json(s.eit.branches)}};
    j["operating_point"] = {{"e_aux_v_per_cm", s.op.e_aux_v_per_cm},
                            {"delta_p_mhz", s.op.delta_p_mhz},
                            {"f_mod_hz", s.op.f_mod_hz}};
    const char* kind = s.signal.kind == FieldSource::Kind::sine      ? "sine"
                       : s.signal.kind == FieldSource::Kind::square ? "square"
                                                                    : "dc_step";
    j["signal"] = {{"kind", kind},
                   {"amplitude_v_per_cm", s.signal.amplitude_v_per_cm},
                   {"frequency_hz", s.signal.frequency_hz},
                   {"phase_rad", s.signal.phase_rad},
                   {"start_time_s", s.signal.start_time_s}};
    j["coupling"] = {{"kappa", s.coupling.kappa},
                     {"mode", s.coupling.mode == CouplingModel::Mode::projected ? "projected"
                                                                                : "magnitude"}};
    j["noise"] = {{"white_nsd", s.noise.white_nsd},
                  {"flicker_exponent", s.noise.flicker_exponent},
                  {"flicker_nsd_at_1hz", s.noise.flicker_nsd_at_1hz}};
    j["demod"] = {{"f_mod_hz", s.demod.f_mod_hz},
                  {"reference",
                   s.demod.reference == DemodConfig::Reference::sine ? "sine" : "square"},
                  {"phase_rad", s.demod.phase_rad},
                  {"lpf_cutoff_hz", s.demod.lpf_cutoff_hz},
                  {"lpf_order", s.demod.lpf_order}};
    return j;
}

inline json fit_to_json(const SineFit& fit) {
    return {{"amplitude_v", fit.amplitude_v},
            {"phase_rad", fit.phase_rad},
            {"offset_v", fit.offset_v},
            {"residual_rms_v", fit.residual_rms_v},
            {"amplitude_sigma_v", fit.amplitude_sigma_v}};
}

inline json linear_fit_to_json(const LinearFit& fit) {
    return {{"slope", fit.slope},
            {"intercept_v", fit.intercept_v},
            {"r_squared", fit.r_squared},
            {"linear_range_max", fit.linear_range_max},
            {"n_used", fit.n_used}};
}

/// Tags quantitative results as paper-consistency (arithmetic on published
/// numbers) or model-relative (depends on kappa, linewidth, weights).
inline constexpr const char* kTagPaperConsistency = "paper-consistency";
inline constexpr const char* kTagModelRelative = "model-relative";

/// File-name stem: subcommand + content hash of the resolved scenario.
inline std::string report_stem(const std::string& subcommand, const json& resolved_scenario) {
    return subcommand + "_" + hash_tag(resolved_scenario.dump());
}

} // namespace rydtwin
