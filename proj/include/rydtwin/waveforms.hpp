#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "rydtwin/errors.hpp"
#include "rydtwin/timeseries.hpp"

namespace rydtwin {

/// Copper plate pair geometry; uniform-field approximation E = V / gap.
struct PlatePair {
    enum class Axis { vertical, horizontal };
    Axis axis = Axis::vertical;
    double gap_cm = 7.2;
    double side_cm = 7.0;
};

inline PlatePair vertical_plates() { return {PlatePair::Axis::vertical, 7.2, 7.0}; }
inline PlatePair horizontal_plates() { return {PlatePair::Axis::horizontal, 7.6, 7.0}; }

inline double plate_field(double voltage_v, const PlatePair& pair) {
    if (!(pair.gap_cm > 0.0)) throw config_error("plate_field: plate gap must be positive");
    return voltage_v / pair.gap_cm;
}

/// A field source applied to one plate pair.
struct FieldSource {
    enum class Kind { dc_step, square, sine };
    Kind kind = Kind::sine;
    double amplitude_v_per_cm = 0.0;
    double frequency_hz = 0.0;
    double phase_rad = 0.0;
    double start_time_s = 0.0;
};

inline FieldSource aux_square(double amplitude, double f_mod_hz) {
    return {FieldSource::Kind::square, amplitude, f_mod_hz, 0.0, 0.0};
}

inline FieldSource signal_sine(double amplitude, double f_hz, double phase = 0.0) {
    return {FieldSource::Kind::sine, amplitude, f_hz, phase, 0.0};
}

inline void validate_source(const FieldSource& src) {
    if (!(src.amplitude_v_per_cm >= 0.0))
        throw config_error("FieldSource: amplitude must be >= 0");
    if (src.kind != FieldSource::Kind::dc_step && !(src.frequency_hz > 0.0))
        throw config_error("FieldSource: periodic sources need frequency > 0");
}

/// Samples a source on a uniform time axis. The square wave is ideal (zero
/// rise time), bipolar, 50% duty and starts positive at phase 0.
inline TimeSeries sample_source(const FieldSource& src, double fs_hz, std::size_t n, double t0 = 0.0) {
    validate_source(src);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    TimeSeries out = make_series(fs_hz, n, "V/cm", t0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = out.time_at(i);
        switch (src.kind) {
            case FieldSource::Kind::dc_step:
                out.values[i] = (t >= src.start_time_s) ? src.amplitude_v_per_cm : 0.0;
                break;
            case FieldSource::Kind::square: {
                // Sign decided half a sample late: edges of an fs/f_mod-locked
                // square otherwise fall exactly on sample instants, where the
                // sin() rounding flips erratically from period to period.
                const double tm = t + 0.5 / fs_hz;
                const double arg = two_pi * src.frequency_hz * (tm - src.start_time_s) + src.phase_rad;
                out.values[i] = (std::sin(arg) >= 0.0) ? src.amplitude_v_per_cm : -src.amplitude_v_per_cm;
                break;
            }
            case FieldSource::Kind::sine:
                out.values[i] = src.amplitude_v_per_cm *
                                std::sin(two_pi * src.frequency_hz * (t - src.start_time_s) + src.phase_rad);
                break;
        }
    }
    return out;
}

/// How the vertical (aux) and horizontal (signal) internal fields combine
/// into the scalar field driving the Stark shift. The small parallel
/// projection kappa supplies the cross term 2*kappa*E_aux*E_sig in E_eff^2
/// that makes the demodulated output linear in signal amplitude. kappa is a
/// simulation parameter, not a measured quantity.
struct CouplingModel {
    enum class Mode { projected, magnitude };
    double kappa = 0.1;
    Mode mode = Mode::projected;
};

inline double effective_field(double aux_v_per_cm, double sig_v_per_cm, const CouplingModel& c) {
    if (!std::isfinite(aux_v_per_cm) || !std::isfinite(sig_v_per_cm) || !std::isfinite(c.kappa))
        throw precondition_error("effective_field: inputs must be finite");
    if (c.mode == CouplingModel::Mode::projected)
        return std::abs(aux_v_per_cm + c.kappa * sig_v_per_cm);
    return std::hypot(aux_v_per_cm, sig_v_per_cm);
}

/// Modulation-frequency schedule used in the experiment: 7.9 kHz up to
/// 200 Hz signals, 27.9 kHz for 500 Hz - 1 kHz, 87.9 kHz for 10 kHz.
inline double fmod_for_signal(double f_signal_hz) {
    if (f_signal_hz <= 200.0) return 7.9e3;
    if (f_signal_hz <= 1000.0) return 27.9e3;
    return 87.9e3;
}

/// Lower limit on f_mod set by the screening window (ridges collapse in
/// about 0.25 ms, i.e. 4 kHz).
constexpr double kFmodFloorHz = 4.0e3;

inline bool fmod_below_floor(double f_mod_hz) { return f_mod_hz < kFmodFloorHz; }

} // namespace rydtwin
