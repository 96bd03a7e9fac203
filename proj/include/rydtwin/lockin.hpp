#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "rydtwin/errors.hpp"
#include "rydtwin/timeseries.hpp"

namespace rydtwin {

/// Software lock-in configuration. RMS output convention: an in-phase input
/// sine of amplitude A at f_mod reads A/sqrt(2) DC with a sine reference and
/// (2 sqrt(2)/pi) * A/sqrt(2) with a square reference.
struct DemodConfig {
    double f_mod_hz = 7.9e3;
    enum class Reference { sine, square };
    Reference reference = Reference::sine;
    double phase_rad = 0.0;
    double lpf_cutoff_hz = 0.0;
    int lpf_order = 4;
};

inline void validate_demod(const DemodConfig& cfg) {
    if (!(cfg.f_mod_hz > 0.0)) throw config_error("DemodConfig: f_mod must be positive");
    if (!(cfg.lpf_cutoff_hz > 0.0) || cfg.lpf_cutoff_hz >= cfg.f_mod_hz / 2.0)
        throw config_error("DemodConfig: lpf_cutoff must lie in (0, f_mod/2)");
    if (cfg.lpf_order < 1) throw config_error("DemodConfig: lpf_order must be >= 1");
}

/// Output settles to the fit window after this long (cascaded-pole bound).
inline double settling_time(const DemodConfig& cfg) {
    return 7.0 / (2.0 * std::numbers::pi * cfg.lpf_cutoff_hz);
}

/// |H| of the digital single-pole cascade at frequency f.
inline double lpf_gain(const DemodConfig& cfg, double f_hz, double fs_hz) {
    const double a = 1.0 - std::exp(-2.0 * std::numbers::pi * cfg.lpf_cutoff_hz / fs_hz);
    const double b = 1.0 - a;
    const double w = 2.0 * std::numbers::pi * f_hz / fs_hz;
    const double mag2 = a * a / (1.0 - 2.0 * b * std::cos(w) + b * b);
    return std::pow(std::sqrt(mag2), cfg.lpf_order);
}

/// Multiply by the unit-amplitude reference at f_mod and low-pass with a
/// cascade of identical single poles.
inline TimeSeries demodulate(const TimeSeries& trace, const DemodConfig& cfg) {
    validate_demod(cfg);
    if (trace.fs_hz < 10.0 * cfg.f_mod_hz)
        throw precondition_error("demodulate: trace sample rate must be >= 10 f_mod");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double alpha = 1.0 - std::exp(-two_pi * cfg.lpf_cutoff_hz / trace.fs_hz);

    TimeSeries out = make_series(trace.fs_hz, trace.size(), "V", trace.t0_s);
    std::vector<double> stages(static_cast<std::size_t>(cfg.lpf_order), 0.0);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double arg = two_pi * cfg.f_mod_hz * trace.time_at(i) + cfg.phase_rad;
        const double ref = (cfg.reference == DemodConfig::Reference::sine)
                               ? std::sqrt(2.0) * std::sin(arg)
                               : (std::sin(arg) >= 0.0 ? 1.0 : -1.0);
        double x = trace.values[i] * ref;
        for (auto& s : stages) {
            s += alpha * (x - s);
            x = s;
        }
        out.values[i] = x;
    }
    return out;
}

/// Result of a three-parameter sine fit a*sin + b*cos + c.
struct SineFit {
    double amplitude_v = 0.0;
    double phase_rad = 0.0;
    double offset_v = 0.0;
    double residual_rms_v = 0.0;
    double amplitude_sigma_v = 0.0; ///< 1-sigma from the fit covariance
};

/// Least-squares fit of a sinusoid at known frequency.
inline SineFit fit_sine(const TimeSeries& trace, double f_hz) {
    if (!(f_hz > 0.0)) throw precondition_error("fit_sine: frequency must be positive");
    if (trace.duration() < 2.0 / f_hz)
        throw precondition_error("fit_sine: trace must span at least 2 periods");
    const std::size_t n = trace.size();
    constexpr double two_pi = 2.0 * std::numbers::pi;

    // Normal equations for the basis {sin, cos, 1}.
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double rhs[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        const double arg = two_pi * f_hz * trace.time_at(i);
        const double base[3] = {std::sin(arg), std::cos(arg), 1.0};
        for (int r = 0; r < 3; ++r) {
            rhs[r] += base[r] * trace.values[i];
            for (int c = 0; c < 3; ++c) m[r][c] += base[r] * base[c];
        }
    }

    // Solve the 3x3 system and invert for the covariance (Gauss-Jordan).
    double aug[3][6];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) aug[r][c] = m[r][c];
        for (int c = 3; c < 6; ++c) aug[r][c] = (c - 3 == r) ? 1.0 : 0.0;
    }
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
        if (std::abs(aug[pivot][col]) < 1e-300) throw fit_error("fit_sine: singular normal matrix");
        if (pivot != col)
            for (int c = 0; c < 6; ++c) std::swap(aug[pivot][c], aug[col][c]);
        const double inv = 1.0 / aug[col][col];
        for (int c = 0; c < 6; ++c) aug[col][c] *= inv;
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            const double factor = aug[r][col];
            for (int c = 0; c < 6; ++c) aug[r][c] -= factor * aug[col][c];
        }
    }
    double coeff[3];
    for (int r = 0; r < 3; ++r)
        coeff[r] = aug[r][3] * rhs[0] + aug[r][4] * rhs[1] + aug[r][5] * rhs[2];

    SineFit fit;
    fit.amplitude_v = std::hypot(coeff[0], coeff[1]);
    fit.phase_rad = std::atan2(coeff[1], coeff[0]);
    fit.offset_v = coeff[2];

    double sse = 0.0, lag1 = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double arg = two_pi * f_hz * trace.time_at(i);
        const double r = trace.values[i] - coeff[0] * std::sin(arg) - coeff[1] * std::cos(arg) - coeff[2];
        sse += r * r;
        if (i > 0) lag1 += r * prev;
        prev = r;
    }
    fit.residual_rms_v = std::sqrt(sse / static_cast<double>(n));
    if (n > 3 && fit.amplitude_v > 0.0) {
        const double s2 = sse / static_cast<double>(n - 3);
        const double a = coeff[0], b = coeff[1], amp = fit.amplitude_v;
        double var = (a * a * aug[0][3] + b * b * aug[1][4] + 2.0 * a * b * aug[0][4]) /
                     (amp * amp) * s2;
        // Low-passed residuals are strongly autocorrelated; inflate the
        // white-noise covariance by the AR(1) effective-sample-size factor so
        // sigma stays honest for oversampled traces.
        if (sse > 0.0) {
            const double rho = std::clamp(lag1 / sse, 0.0, 1.0 - 1e-9);
            var *= (1.0 + rho) / (1.0 - rho);
        }
        fit.amplitude_sigma_v = std::sqrt(std::max(0.0, var));
    }
    return fit;
}

/// Linear response fit with a saturation cut.
struct LinearFit {
    double slope = 0.0;            ///< output V per input V/cm
    double intercept_v = 0.0;
    double r_squared = 0.0;
    double linear_range_max = 0.0; ///< last input amplitude inside the linear region
    std::size_t n_used = 0;
};

/// Selects the maximal low-amplitude prefix whose linear fit keeps every
/// relative residual below 5%, then reports slope, r^2 and the saturation
/// cut. Inputs must be strictly increasing.
inline LinearFit fit_responsivity(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4) throw fit_error("fit_responsivity: need at least 4 points");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i].first > points[i - 1].first))
            throw fit_error("fit_responsivity: input amplitudes must be strictly increasing");

    constexpr double kMaxRelResidual = 0.05;
    auto fit_prefix = [&](std::size_t k, LinearFit& out) -> bool {
        double sx = 0, sy = 0, sxx = 0, sxy = 0, ymax = 0;
        for (std::size_t i = 0; i < k; ++i) {
            sx += points[i].first;
            sy += points[i].second;
            sxx += points[i].first * points[i].first;
            sxy += points[i].first * points[i].second;
            ymax = std::max(ymax, std::abs(points[i].second));
        }
        const double nk = static_cast<double>(k);
        const double det = nk * sxx - sx * sx;
        if (std::abs(det) < 1e-300 || ymax == 0.0) return false;
        const double slope = (nk * sxy - sx * sy) / det;
        const double icept = (sy - slope * sx) / nk;

        double ss_res = 0.0, ss_tot = 0.0;
        const double ymean = sy / nk;
        for (std::size_t i = 0; i < k; ++i) {
            const double pred = slope * points[i].first + icept;
            const double r = points[i].second - pred;
            // Zero-intercept-tolerant: guard the denominator near y = 0.
            const double denom = std::max(std::abs(points[i].second), 0.02 * ymax);
            if (std::abs(r) / denom >= kMaxRelResidual) return false;
            ss_res += r * r;
            ss_tot += (points[i].second - ymean) * (points[i].second - ymean);
        }
        out.slope = slope;
        out.intercept_v = icept;
        out.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 0.0;
        out.linear_range_max = points[k - 1].first;
        out.n_used = k;
        return true;
    };

    for (std::size_t k = points.size(); k >= 4; --k) {
        LinearFit fit;
        if (fit_prefix(k, fit)) return fit;
    }
    throw fit_error("fit_responsivity: no linear prefix of >= 4 points within 5% residuals");
}

} // namespace rydtwin
