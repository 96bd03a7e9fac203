#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "rydtwin/cell.hpp"
#include "rydtwin/errors.hpp"
#include "rydtwin/stark.hpp"
#include "rydtwin/timeseries.hpp"
#include "rydtwin/waveforms.hpp"

namespace rydtwin {

/// Parametric Rydberg-EIT lineshape: one unit-height Lorentzian per mj
/// branch, centered at the branch's Stark shift. The Rabi frequencies are
/// carried as scenario provenance only; they do not enter the lineshape.
struct EitModel {
    std::vector<RydbergBranch> branches;
    double linewidth_fwhm_mhz = 10.0;
    double peak_voltage_v = 1.0;   ///< balanced-PD amplitude at resonance, zero field
    double rabi_probe_rad_s = 2.0 * std::numbers::pi * 29.5e6;
    double rabi_coupling_rad_s = 2.0 * std::numbers::pi * 1.7e6;
};

inline EitModel default_eit() {
    EitModel m;
    auto b = default_branches();
    m.branches.assign(b.begin(), b.end());
    return m;
}

inline void validate_eit(const EitModel& m) {
    if (!(m.linewidth_fwhm_mhz > 0.0)) throw config_error("EitModel: linewidth must be positive");
    if (!(m.peak_voltage_v > 0.0)) throw config_error("EitModel: peak voltage must be positive");
    validate_branches(m.branches);
}

/// Balanced-PD voltage at probe detuning delta_p for instantaneous internal
/// field E_eff. Background-free (balanced detection).
inline double transmission(double delta_p_mhz, double e_eff_v_per_cm, const EitModel& model) {
    if (!std::isfinite(delta_p_mhz) || !std::isfinite(e_eff_v_per_cm))
        throw precondition_error("transmission: inputs must be finite");
    const double half_width = 0.5 * model.linewidth_fwhm_mhz;
    double sum = 0.0;
    for (const auto& b : model.branches) {
        const double x = (delta_p_mhz - stark_shift(e_eff_v_per_cm, b)) / half_width;
        sum += b.weight / (1.0 + x * x);
    }
    return model.peak_voltage_v * sum;
}

/// Detuning-resolved step transient: rows are detunings, columns time samples.
struct DetuningTransientMap {
    std::vector<double> detuning_axis_mhz;
    double fs_hz = 0.0;
    std::vector<double> internal_field_v_per_cm;  ///< shared screening trajectory
    std::vector<std::vector<double>> voltage_v;   ///< [detuning row][time column]

    double time_at(std::size_t col) const { return static_cast<double>(col) / fs_hz; }
    std::size_t columns() const { return internal_field_v_per_cm.size(); }
};

/// Simulates a DC field step through the cell and records the transmission
/// versus time at each probe detuning.
inline DetuningTransientMap detuning_transient_map(const std::vector<double>& detuning_axis,
                                                   double step_field_v_per_cm,
                                                   const EitModel& eit, const CellModel& cell,
                                                   double duration_s, double fs_hz) {
    validate_eit(eit);
    if (detuning_axis.empty()) throw precondition_error("detuning_transient_map: empty detuning axis");
    for (std::size_t i = 1; i < detuning_axis.size(); ++i)
        if (detuning_axis[i] < detuning_axis[i - 1])
            throw precondition_error("detuning_transient_map: detuning axis must be sorted");
    const double tau_decay =
        tau_for_amplitude(cell, std::abs(step_field_v_per_cm)) / 0.6931471805599453;
    if (duration_s < 5.0 * tau_decay)
        throw precondition_error("detuning_transient_map: duration must cover >= 5 tau_decay");

    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs_hz));
    FieldSource step{FieldSource::Kind::dc_step, std::abs(step_field_v_per_cm), 0.0, 0.0, 0.0};
    ScreeningState state;
    const TimeSeries internal = screen(sample_source(step, fs_hz, n), cell, state);

    DetuningTransientMap map;
    map.detuning_axis_mhz = detuning_axis;
    map.fs_hz = fs_hz;
    map.internal_field_v_per_cm = internal.values;
    map.voltage_v.assign(detuning_axis.size(), std::vector<double>(n));
    for (std::size_t r = 0; r < detuning_axis.size(); ++r)
        for (std::size_t c = 0; c < n; ++c)
            map.voltage_v[r][c] = transmission(detuning_axis[r], internal.values[c], eit);
    return map;
}

/// Detuning of the uppermost ridge (highest-detuning local maximum along the
/// detuning axis) of one time column. Returns the axis value, or NaN when the
/// column is flat.
inline double uppermost_ridge_detuning(const DetuningTransientMap& map, std::size_t col) {
    const auto& axis = map.detuning_axis_mhz;
    const std::size_t rows = axis.size();
    for (std::size_t i = rows; i-- > 0;) {
        const double v = map.voltage_v[i][col];
        const bool above_ok = (i + 1 >= rows) || v > map.voltage_v[i + 1][col];
        const bool below_ok = (i == 0) || v >= map.voltage_v[i - 1][col];
        if (above_ok && below_ok) return axis[i];
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Time at which the split ridge structure has collapsed back onto the
/// zero-field line: first time the uppermost ridge sits below
/// `threshold_mhz` (typically one linewidth). This is the end of the sensing
/// window the modulation frequency has to beat.
inline double ridge_collapse_time(const DetuningTransientMap& map, double threshold_mhz) {
    for (std::size_t c = 0; c < map.columns(); ++c) {
        const double ridge = uppermost_ridge_detuning(map, c);
        if (std::isfinite(ridge) && ridge <= threshold_mhz) return map.time_at(c);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Time at which a single branch's ridge trajectory first crosses below
/// `delta_p_mhz` (literal line crossing in the (t, detuning) plane).
inline double ridge_crossing_time(const DetuningTransientMap& map, const RydbergBranch& branch,
                                  double delta_p_mhz) {
    for (std::size_t c = 0; c < map.columns(); ++c) {
        const double shift = stark_shift(map.internal_field_v_per_cm[c], branch);
        if (shift <= delta_p_mhz) return map.time_at(c);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace rydtwin
