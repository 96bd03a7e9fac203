#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "rydtwin/detail/fft.hpp"
#include "rydtwin/detail/rng.hpp"
#include "rydtwin/errors.hpp"
#include "rydtwin/timeseries.hpp"

namespace rydtwin {

/// Noise budget of one scenario. Amplitude-spectral-density convention
/// throughout (V/sqrt(Hz)); PSD is its square. The flicker ASD goes as
/// f^(-flicker_exponent), anchored at 1 Hz.
struct NoiseSpec {
    double white_nsd = 0.0;          ///< V/sqrt(Hz)
    double flicker_exponent = 0.7;
    double flicker_nsd_at_1hz = 0.0; ///< V/sqrt(Hz); no ground-truth default
    std::uint64_t seed = 0;
};

/// Zero-mean Gaussian trace with one-sided ASD `nsd`: sigma = nsd*sqrt(fs/2).
inline TimeSeries white_noise(double nsd, double fs_hz, std::size_t n, std::uint64_t seed) {
    if (!(nsd >= 0.0)) throw precondition_error("white_noise: nsd must be >= 0");
    if (!(fs_hz > 0.0) || n == 0) throw precondition_error("white_noise: fs and n must be positive");
    TimeSeries out = make_series(fs_hz, n, "V");
    const double sigma = nsd * std::sqrt(fs_hz / 2.0);
    detail::SplitMix64 rng(seed);
    for (auto& v : out.values) v = sigma * rng.next_gaussian();
    return out;
}

/// Gaussian noise spectrally shaped so the one-sided ASD is
/// flicker_nsd_at_1hz * f^(-flicker_exponent). Frequency-domain synthesis;
/// n must be a power of two.
inline TimeSeries flicker_noise(const NoiseSpec& spec, double fs_hz, std::size_t n,
                                std::uint64_t seed) {
    if (!detail::is_power_of_two(n))
        throw precondition_error("flicker_noise: n must be a power of two");
    if (!(fs_hz > 0.0)) throw precondition_error("flicker_noise: fs must be positive");
    if (!(spec.flicker_nsd_at_1hz >= 0.0))
        throw precondition_error("flicker_noise: 1 Hz anchor must be >= 0");

    std::vector<std::complex<double>> spectrum(n, {0.0, 0.0});
    detail::SplitMix64 rng(seed);
    const double nf = static_cast<double>(n);
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) * fs_hz / nf;
        // One-sided target PSD at f; E|X_k|^2 = PSD * fs * n / 2.
        const double psd = spec.flicker_nsd_at_1hz * spec.flicker_nsd_at_1hz *
                           std::pow(f, -2.0 * spec.flicker_exponent);
        const double scale = std::sqrt(psd * fs_hz * nf / 4.0);
        const double re = rng.next_gaussian();
        const double im = rng.next_gaussian();
        if (k == n / 2) {
            spectrum[k] = {re * 2.0 * scale, 0.0}; // Nyquist bin carries no one-sided factor
        } else {
            spectrum[k] = {re * scale, im * scale};
            spectrum[n - k] = std::conj(spectrum[k]);
        }
    }
    detail::fft(spectrum, /*inverse=*/true);
    TimeSeries out = make_series(fs_hz, n, "V");
    for (std::size_t i = 0; i < n; ++i) out.values[i] = spectrum[i].real() / nf;
    return out;
}

/// Welch amplitude-spectral-density estimate.
struct AsdEstimate {
    std::vector<double> freq_hz;
    std::vector<double> asd;   ///< V/sqrt(Hz), one-sided
    double rbw_hz = 0.0;       ///< equivalent noise bandwidth of one bin
    std::size_t n_segments = 0;
};

/// Averaged periodogram with Hann windowing, one-sided, amplitude convention
/// sqrt(PSD). `overlap` is the fractional segment overlap in [0, 1).
/// segment_length must be a power of two.
inline AsdEstimate estimate_asd(const TimeSeries& trace, std::size_t segment_length,
                                double overlap = 0.5) {
    const std::size_t n = trace.size();
    if (segment_length == 0 || segment_length > n)
        throw precondition_error("estimate_asd: segment_length must be in [1, trace length]");
    if (!detail::is_power_of_two(segment_length))
        throw precondition_error("estimate_asd: segment_length must be a power of two");
    if (!(overlap >= 0.0 && overlap < 1.0))
        throw precondition_error("estimate_asd: overlap must be in [0, 1)");

    const auto step = static_cast<std::size_t>(
        std::max<double>(1.0, std::floor((1.0 - overlap) * static_cast<double>(segment_length))));

    std::vector<double> window(segment_length);
    double wsq = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < segment_length; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(segment_length)));
        wsq += window[i] * window[i];
        wsum += window[i];
    }

    const std::size_t bins = segment_length / 2 + 1;
    std::vector<double> psd(bins, 0.0);
    std::vector<std::complex<double>> buf(segment_length);
    std::size_t n_segments = 0;
    for (std::size_t start = 0; start + segment_length <= n; start += step) {
        for (std::size_t i = 0; i < segment_length; ++i)
            buf[i] = {window[i] * trace.values[start + i], 0.0};
        detail::fft(buf);
        for (std::size_t k = 0; k < bins; ++k) {
            const double mag2 = std::norm(buf[k]);
            const bool interior = (k != 0 && k != segment_length / 2);
            psd[k] += (interior ? 2.0 : 1.0) * mag2 / (trace.fs_hz * wsq);
        }
        ++n_segments;
    }
    if (n_segments == 0) throw precondition_error("estimate_asd: no full segment fits the trace");

    AsdEstimate est;
    est.n_segments = n_segments;
    est.rbw_hz = trace.fs_hz * wsq / (wsum * wsum); // Hann ENBW
    est.freq_hz.resize(bins);
    est.asd.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        est.freq_hz[k] = static_cast<double>(k) * trace.fs_hz / static_cast<double>(segment_length);
        est.asd[k] = std::sqrt(psd[k] / static_cast<double>(n_segments));
    }
    return est;
}

/// Root-sum-square combination of uncorrelated noise densities.
inline double nsd_total(double nsd_pd, double nsd_lia) {
    if (!(nsd_pd >= 0.0) || !(nsd_lia >= 0.0))
        throw precondition_error("nsd_total: densities must be >= 0");
    return std::hypot(nsd_pd, nsd_lia);
}

/// Configurable lock-in input voltage noise curve, ASD = anchor * f^(-exponent).
inline double nsd_lia_at(double f_hz, double anchor_at_1hz, double exponent = 0.7) {
    if (!(f_hz > 0.0)) throw precondition_error("nsd_lia_at: frequency must be positive");
    return anchor_at_1hz * std::pow(f_hz, -exponent);
}

} // namespace rydtwin
