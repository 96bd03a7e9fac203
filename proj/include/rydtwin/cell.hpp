#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "rydtwin/errors.hpp"
#include "rydtwin/timeseries.hpp"

namespace rydtwin {

/// Calibration pair: applied field amplitude -> half-recovery time.
struct TauPoint {
    double field_v_per_cm = 0.0;
    double tau_half_s = 0.0;
};

/// Phenomenological screening behavior of a vapor cell.
struct CellModel {
    enum class Kind { uncoated, paraffin };
    Kind kind = Kind::paraffin;
    std::vector<TauPoint> tau_points;
    double radius_cm = 1.5;
};

/// Standard cell: screening time 10 us, independent of amplitude.
inline CellModel uncoated_cell() {
    return {CellModel::Kind::uncoated, {{0.833, 10e-6}}, 1.5};
}

/// Paraffin-coated cell, calibrated at 354 and 833 mV/cm.
inline CellModel paraffin_cell() {
    return {CellModel::Kind::paraffin, {{0.354, 0.1e-3}, {0.833, 0.6e-3}}, 1.5};
}

inline void validate_cell(const CellModel& model) {
    if (model.tau_points.empty()) throw config_error("CellModel: tau_points is empty");
    for (std::size_t i = 0; i < model.tau_points.size(); ++i) {
        if (!(model.tau_points[i].tau_half_s > 0.0))
            throw config_error("CellModel: half-recovery times must be positive");
        if (i > 0 && !(model.tau_points[i].field_v_per_cm > model.tau_points[i - 1].field_v_per_cm))
            throw config_error("CellModel: tau_points amplitudes must be strictly increasing");
    }
}

/// Half-recovery time at amplitude E: piecewise-linear in the calibration
/// table, clamped to the endpoints outside the calibrated range.
inline double tau_for_amplitude(const CellModel& model, double e_v_per_cm) {
    validate_cell(model);
    if (!(e_v_per_cm >= 0.0)) throw precondition_error("tau_for_amplitude: amplitude must be >= 0");
    const auto& pts = model.tau_points;
    if (e_v_per_cm <= pts.front().field_v_per_cm) return pts.front().tau_half_s;
    if (e_v_per_cm >= pts.back().field_v_per_cm) return pts.back().tau_half_s;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (e_v_per_cm <= pts[i].field_v_per_cm) {
            double x0 = pts[i - 1].field_v_per_cm, x1 = pts[i].field_v_per_cm;
            double y0 = pts[i - 1].tau_half_s, y1 = pts[i].tau_half_s;
            return y0 + (y1 - y0) * (e_v_per_cm - x0) / (x1 - x0);
        }
    }
    return pts.back().tau_half_s;
}

/// Integrator state of the screening dynamic; one instance per plate axis.
struct ScreeningState {
    double screening_field = 0.0; ///< accumulated opposing field, V/cm
    double tau_half_s = -1.0;     ///< tau in force for the current segment
    double prev_applied = std::numeric_limits<double>::quiet_NaN();
    double peak_applied = 0.0;    ///< largest |applied| seen, for step detection
};

/// First-order high-pass screening: internal = applied - s,
/// ds/dt = internal / tau_decay with tau_decay = tau_half / ln 2, so a step of
/// height E0 reads E0/2 exactly at the configured half-recovery time.
/// The linear segment between samples is integrated exactly (ZOH + exponential
/// update). tau is re-evaluated per applied-field step, from the new level's
/// magnitude, and held piecewise constant in between.
inline TimeSeries screen(const TimeSeries& applied, const CellModel& model, ScreeningState& state) {
    validate_cell(model);
    static constexpr double kLn2 = 0.6931471805599453;
    const double dt = applied.dt();

    TimeSeries internal = make_series(applied.fs_hz, applied.size(), "V/cm", applied.t0_s);
    for (std::size_t i = 0; i < applied.size(); ++i) {
        const double a = applied.values[i];
        if (!std::isfinite(a)) throw precondition_error("screen: applied field must be finite");

        // A discontinuity (step/polarity flip) re-selects tau from the new level.
        const bool first = !(state.tau_half_s > 0.0) || std::isnan(state.prev_applied);
        const double jump = first ? 0.0 : std::abs(a - state.prev_applied);
        if (first || jump > 0.5 * state.peak_applied)
            state.tau_half_s = tau_for_amplitude(model, std::abs(a));
        state.prev_applied = a;
        state.peak_applied = std::max(state.peak_applied, std::abs(a));

        const double tau_decay = state.tau_half_s / kLn2;
        if (dt > tau_decay / 10.0) {
            std::ostringstream msg;
            msg << "screen: sample interval " << dt << " s exceeds tau_decay/10 for tau_half = "
                << state.tau_half_s << " s";
            throw precondition_error(msg.str());
        }

        internal.values[i] = a - state.screening_field;
        // Exact update over [t_i, t_i + dt] with the applied field held at a.
        state.screening_field = a + (state.screening_field - a) * std::exp(-dt / tau_decay);
    }
    return internal;
}

} // namespace rydtwin
