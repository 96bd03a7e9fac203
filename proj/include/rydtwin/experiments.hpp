#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "rydtwin/cell.hpp"
#include "rydtwin/detail/rng.hpp"
#include "rydtwin/errors.hpp"
#include "rydtwin/lockin.hpp"
#include "rydtwin/noise.hpp"
#include "rydtwin/spectroscopy.hpp"
#include "rydtwin/stark.hpp"
#include "rydtwin/timeseries.hpp"
#include "rydtwin/waveforms.hpp"

namespace rydtwin {

/// Sensor operating point: auxiliary amplitude, probe detuning, modulation
/// frequency (0 = pick from the schedule for the signal frequency).
struct OperatingPoint {
    double e_aux_v_per_cm = 0.354;
    double delta_p_mhz = 243.0;
    double f_mod_hz = 0.0;
};

/// Full experiment description. Zero-valued timing/demod entries are
/// resolved from the operating point and signal frequency.
struct Scenario {
    CellModel cell = paraffin_cell();
    EitModel eit = default_eit();
    FieldSource signal = signal_sine(0.0437, 10.0);
    CouplingModel coupling;
    OperatingPoint op;
    DemodConfig demod;
    NoiseSpec noise;
    double fs_hz = 0.0;
    double duration_s = 0.0;
    std::uint64_t seed = 1;
};

/// Pre-fit trim, in units of the lock-in settling bound. A single settling
/// time still leaves the order-4 cascade ~8% away from its DC level, which
/// would bury microvolt signal tones under the charging drift; four bounds
/// push the residual below 1e-8 of the DC reading.
inline constexpr double kFitTrimSettlings = 4.0;

/// Scenario with all derived quantities filled in; what reports embed.
inline Scenario resolve(const Scenario& s) {
    Scenario r = s;
    const double f = r.signal.frequency_hz;
    if (!(f > 0.0)) throw config_error("Scenario: signal frequency must be positive");
    if (!std::isfinite(r.op.delta_p_mhz)) throw config_error("Scenario: delta_p must be finite");
    if (r.op.f_mod_hz <= 0.0) r.op.f_mod_hz = fmod_for_signal(f);
    r.demod.f_mod_hz = r.op.f_mod_hz;
    if (r.demod.lpf_cutoff_hz <= 0.0) r.demod.lpf_cutoff_hz = 1.265 * f;
    if (r.fs_hz <= 0.0) r.fs_hz = 20.0 * r.op.f_mod_hz;
    const double settle = settling_time(r.demod);
    if (r.duration_s <= 0.0) r.duration_s = kFitTrimSettlings * settle + 2.2 / f;
    if (r.fs_hz < 10.0 * r.op.f_mod_hz)
        throw config_error("Scenario: fs must be >= 10 f_mod");
    const double tau_lpf = 1.0 / (2.0 * std::numbers::pi * r.demod.lpf_cutoff_hz);
    if (r.duration_s < std::max(2.0 / f, 10.0 * tau_lpf))
        throw config_error("Scenario: duration too short for the signal frequency");
    if (r.duration_s < kFitTrimSettlings * settle + 2.0 / f)
        throw config_error(
            "Scenario: duration leaves < 2 signal periods after lock-in settling");
    validate_cell(r.cell);
    validate_eit(r.eit);
    validate_demod(r.demod);
    return r;
}

struct SensingResult {
    Scenario scenario;        ///< resolved
    TimeSeries pd_v;          ///< photodetector trace
    TimeSeries demod_v;       ///< lock-in output
    SineFit fit;              ///< sine fit at the signal frequency (settled part)
    bool fmod_below_floor = false;
};

/// Full sensing chain: sources -> per-axis screening -> effective field ->
/// EIT transmission -> noise -> lock-in -> sine fit. Deterministic per seed.
inline SensingResult run_sensing(const Scenario& scenario) {
    const Scenario s = resolve(scenario);
    const auto n = static_cast<std::size_t>(std::llround(s.fs_hz * s.duration_s));

    const TimeSeries aux_applied = sample_source(aux_square(s.op.e_aux_v_per_cm, s.op.f_mod_hz), s.fs_hz, n);
    const TimeSeries sig_applied = sample_source(s.signal, s.fs_hz, n);

    ScreeningState aux_state, sig_state;
    const TimeSeries aux_int = screen(aux_applied, s.cell, aux_state);
    const TimeSeries sig_int = screen(sig_applied, s.cell, sig_state);

    TimeSeries pd = make_series(s.fs_hz, n, "V");
    for (std::size_t i = 0; i < n; ++i) {
        const double e_eff = effective_field(aux_int.values[i], sig_int.values[i], s.coupling);
        pd.values[i] = transmission(s.op.delta_p_mhz, e_eff, s.eit);
    }
    if (s.noise.white_nsd > 0.0) {
        const TimeSeries w = white_noise(s.noise.white_nsd, s.fs_hz, n, detail::derive_seed(s.seed, 1));
        for (std::size_t i = 0; i < n; ++i) pd.values[i] += w.values[i];
    }

    TimeSeries demod = demodulate(pd, s.demod);
    if (s.noise.flicker_nsd_at_1hz > 0.0) {
        std::size_t n2 = 1;
        while (n2 < n) n2 <<= 1;
        const TimeSeries fl = flicker_noise(s.noise, s.fs_hz, n2, detail::derive_seed(s.seed, 2));
        for (std::size_t i = 0; i < n; ++i) demod.values[i] += fl.values[i];
    }

    SensingResult result;
    result.scenario = s;
    result.fmod_below_floor = fmod_below_floor(s.op.f_mod_hz);
    result.fit = fit_sine(trim_front(demod, kFitTrimSettlings * settling_time(s.demod)),
                          s.signal.frequency_hz);
    result.pd_v = std::move(pd);
    result.demod_v = std::move(demod);
    return result;
}

/// Worker count: explicit request > RYDBERG_TWIN_THREADS > hardware.
inline unsigned resolve_worker_count(unsigned requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("RYDBERG_TWIN_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Fitted-amplitude map over (E_aux, delta_p).
struct OperatingGrid {
    std::vector<double> e_aux_axis;
    std::vector<double> delta_p_axis;
    std::vector<std::vector<double>> metric_v; ///< [e_aux index][delta_p index]; NaN = failed cell
    std::size_t argmax_e = 0;
    std::size_t argmax_dp = 0;
    double max_metric = 0.0;
};

/// Runs `runner` (default: run_sensing fitted amplitude) on every grid cell.
/// Each cell owns a scenario copy with a seed derived from its grid index, so
/// the result is independent of evaluation order and worker count.
template <typename Runner>
    requires std::is_invocable_r_v<double, Runner, const Scenario&>
OperatingGrid grid_scan(const std::vector<double>& e_aux_axis,
                        const std::vector<double>& delta_p_axis, const Scenario& base,
                        Runner&& runner, unsigned workers = 0) {
    if (e_aux_axis.empty() || delta_p_axis.empty())
        throw precondition_error("grid_scan: axes must be non-empty");
    const std::size_t ni = e_aux_axis.size(), nj = delta_p_axis.size();
    std::vector<double> flat(ni * nj, std::numeric_limits<double>::quiet_NaN());

    const unsigned n_workers = std::min<unsigned>(resolve_worker_count(workers),
                                                  static_cast<unsigned>(ni * nj));
    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t idx = cursor.fetch_add(1);
            if (idx >= flat.size()) return;
            Scenario cell = base;
            cell.op.e_aux_v_per_cm = e_aux_axis[idx / nj];
            cell.op.delta_p_mhz = delta_p_axis[idx % nj];
            cell.seed = detail::derive_seed(base.seed, idx);
            try {
                flat[idx] = runner(cell);
            } catch (const std::exception&) {
                // recorded as missing value
            }
        }
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    OperatingGrid grid;
    grid.e_aux_axis = e_aux_axis;
    grid.delta_p_axis = delta_p_axis;
    grid.metric_v.assign(ni, std::vector<double>(nj));
    grid.max_metric = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ni; ++i) {
        for (std::size_t j = 0; j < nj; ++j) {
            const double v = flat[i * nj + j];
            grid.metric_v[i][j] = v;
            if (std::isfinite(v) && v > grid.max_metric) {
                grid.max_metric = v;
                grid.argmax_e = i;
                grid.argmax_dp = j;
            }
        }
    }
    return grid;
}

inline OperatingGrid grid_scan(const std::vector<double>& e_aux_axis,
                               const std::vector<double>& delta_p_axis, const Scenario& base,
                               unsigned workers = 0) {
    return grid_scan(e_aux_axis, delta_p_axis, base,
                     [](const Scenario& s) { return run_sensing(s).fit.amplitude_v; }, workers);
}

/// One responsivity measurement: fitted output amplitude per input amplitude,
/// then the saturation-cut linear fit giving m(f).
struct ResponsivitySweep {
    double f_signal_hz = 0.0;
    std::vector<std::pair<double, double>> points; ///< (input V/cm, output V)
    LinearFit fit;
};

inline ResponsivitySweep responsivity_sweep(double f_signal_hz,
                                            const std::vector<double>& amplitudes,
                                            const Scenario& base, unsigned workers = 0) {
    if (amplitudes.size() < 4)
        throw precondition_error("responsivity_sweep: need at least 4 amplitudes");
    std::vector<double> outputs(amplitudes.size(), std::numeric_limits<double>::quiet_NaN());

    const unsigned n_workers = std::min<unsigned>(resolve_worker_count(workers),
                                                  static_cast<unsigned>(amplitudes.size()));
    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t idx = cursor.fetch_add(1);
            if (idx >= amplitudes.size()) return;
            Scenario s = base;
            s.signal.frequency_hz = f_signal_hz;
            s.signal.amplitude_v_per_cm = amplitudes[idx];
            s.op.f_mod_hz = (base.op.f_mod_hz > 0.0) ? base.op.f_mod_hz : fmod_for_signal(f_signal_hz);
            s.fs_hz = 0.0;
            s.duration_s = 0.0;
            s.demod.lpf_cutoff_hz = 0.0;
            s.seed = detail::derive_seed(base.seed, idx);
            outputs[idx] = run_sensing(s).fit.amplitude_v;
        }
    };
    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    ResponsivitySweep sweep;
    sweep.f_signal_hz = f_signal_hz;
    for (std::size_t i = 0; i < amplitudes.size(); ++i)
        sweep.points.emplace_back(amplitudes[i], outputs[i]);
    sweep.fit = fit_responsivity(sweep.points);
    return sweep;
}

/// Direct (unmodulated) sensing. The quadratic Stark response of a bias-free
/// sine appears at twice the signal frequency, so the tone is fitted at 2f on
/// the raw PD trace. SNR = fitted amplitude / fit residual rms.
struct DirectSensingResult {
    TimeSeries pd_v;
    SineFit fit;       ///< at 2 f_signal
    double snr = 0.0;
};

inline DirectSensingResult direct_sensing(double f_signal_hz, double amplitude_v_per_cm,
                                          double delta_p_mhz, const Scenario& base) {
    Scenario s = base;
    s.op.e_aux_v_per_cm = 0.0;
    s.op.delta_p_mhz = delta_p_mhz;
    s.signal = signal_sine(amplitude_v_per_cm, f_signal_hz);
    const Scenario r = [&] {
        Scenario tmp = s;
        tmp.op.f_mod_hz = fmod_for_signal(f_signal_hz); // timing only; no demodulation
        if (tmp.fs_hz <= 0.0) tmp.fs_hz = std::max(20.0 * tmp.op.f_mod_hz, 40.0 * f_signal_hz);
        if (tmp.duration_s <= 0.0) tmp.duration_s = std::max(2.5 / f_signal_hz, 0.05);
        return tmp;
    }();

    const auto n = static_cast<std::size_t>(std::llround(r.fs_hz * r.duration_s));
    ScreeningState state;
    const TimeSeries sig_int = screen(sample_source(r.signal, r.fs_hz, n), r.cell, state);
    TimeSeries pd = make_series(r.fs_hz, n, "V");
    for (std::size_t i = 0; i < n; ++i) {
        const double e_eff = effective_field(0.0, sig_int.values[i], r.coupling);
        pd.values[i] = transmission(r.op.delta_p_mhz, e_eff, r.eit);
    }
    if (r.noise.white_nsd > 0.0) {
        const TimeSeries w = white_noise(r.noise.white_nsd, r.fs_hz, n, detail::derive_seed(r.seed, 1));
        for (std::size_t i = 0; i < n; ++i) pd.values[i] += w.values[i];
    }

    DirectSensingResult out;
    out.fit = fit_sine(pd, 2.0 * f_signal_hz);
    out.snr = (out.fit.residual_rms_v > 0.0) ? out.fit.amplitude_v / out.fit.residual_rms_v
                                             : std::numeric_limits<double>::infinity();
    out.pd_v = std::move(pd);
    return out;
}

/// PD noise density measured at each modulation frequency of the schedule.
struct NsdSchedule {
    std::vector<std::pair<double, double>> nsd_pd_per_fmod = {
        {7.9e3, 0.9e-6}, {27.9e3, 2.57e-6}, {87.9e3, 7.54e-6}}; ///< (f_mod Hz, V/sqrtHz)
    double lia_anchor_at_1hz = 0.0; ///< V/sqrtHz; configuration input
    double lia_exponent = 0.7;
    enum class LiaEval { at_signal_frequency, at_fmod };
    LiaEval lia_eval = LiaEval::at_signal_frequency;

    double nsd_pd_for(double f_mod_hz) const {
        for (const auto& [fm, nsd] : nsd_pd_per_fmod)
            if (std::abs(fm - f_mod_hz) < 1e-6 * fm) return nsd;
        throw config_error("NsdSchedule: no NSD_PD configured for f_mod = " +
                           std::to_string(f_mod_hz));
    }
};

/// One row of the sensitivity table.
struct SensitivityRow {
    double f_hz = 0.0;
    double f_mod_hz = 0.0;
    double responsivity = 0.0;  ///< m(f), output V per input V/cm
    double nsd_pd = 0.0;        ///< V/sqrtHz
    double nsd_lia = 0.0;       ///< V/sqrtHz
    double nsd_total = 0.0;     ///< V/sqrtHz
    double sensitivity = 0.0;   ///< S_E, V/cm/sqrtHz
};

struct SensitivityReport {
    std::vector<SensitivityRow> rows;
};

/// S_E = NSD_total / m(f), with NSD_PD picked per the f_mod schedule and the
/// LIA flicker curve evaluated per the configured choice.
inline SensitivityReport sensitivity_report(const std::vector<double>& frequencies,
                                            const std::vector<double>& m_values,
                                            const NsdSchedule& schedule) {
    if (frequencies.size() != m_values.size())
        throw precondition_error("sensitivity_report: frequency/m length mismatch");
    SensitivityReport report;
    for (std::size_t i = 0; i < frequencies.size(); ++i) {
        if (!(m_values[i] > 0.0))
            throw precondition_error("sensitivity_report: responsivities must be positive");
        SensitivityRow row;
        row.f_hz = frequencies[i];
        row.f_mod_hz = fmod_for_signal(frequencies[i]);
        row.responsivity = m_values[i];
        row.nsd_pd = schedule.nsd_pd_for(row.f_mod_hz);
        const double f_eval = (schedule.lia_eval == NsdSchedule::LiaEval::at_signal_frequency)
                                  ? row.f_hz
                                  : row.f_mod_hz;
        row.nsd_lia = (schedule.lia_anchor_at_1hz > 0.0)
                          ? nsd_lia_at(f_eval, schedule.lia_anchor_at_1hz, schedule.lia_exponent)
                          : 0.0;
        row.nsd_total = nsd_total(row.nsd_pd, row.nsd_lia);
        row.sensitivity = row.nsd_total / row.responsivity;
        report.rows.push_back(row);
    }
    return report;
}

/// Parametric classical-receiver baseline S_E(f) = S0 * (f0/f)^p; defaults
/// tuned so the baseline sits one to two orders of magnitude above the
/// Rydberg sensitivities below 100 Hz and approaches them near 1 kHz.
/// Model-relative: not a measurement of any specific antenna.
struct DipoleBaseline {
    double s0_v_per_cm_sqrthz = 4.0e-6;
    double f0_hz = 1000.0;
    double exponent = 1.42;
};

inline double dipole_baseline(double f_hz, const DipoleBaseline& params = {}) {
    if (!(f_hz > 0.0)) throw precondition_error("dipole_baseline: frequency must be positive");
    return params.s0_v_per_cm_sqrthz * std::pow(params.f0_hz / f_hz, params.exponent);
}

} // namespace rydtwin
