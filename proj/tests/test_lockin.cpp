#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "rydtwin/lockin.hpp"
#include "rydtwin/noise.hpp"

using namespace rydtwin;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TimeSeries tone(double a, double f, double fs, double duration, double phase = 0.0) {
    auto ts = make_series(fs, static_cast<std::size_t>(duration * fs), "V");
    for (std::size_t i = 0; i < ts.size(); ++i)
        ts.values[i] = a * std::sin(kTwoPi * f * ts.time_at(i) + phase);
    return ts;
}

DemodConfig demod_100hz() {
    DemodConfig cfg;
    cfg.f_mod_hz = 7.9e3;
    cfg.lpf_cutoff_hz = 100.0;
    return cfg;
}

double settled_mean(const TimeSeries& out, double from_s) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out.time_at(i) < from_s) continue;
        acc += out.values[i];
        ++n;
    }
    return acc / double(n);
}

} // namespace

TEST_CASE("in-phase tone reads its RMS with a sine reference") {
    const auto cfg = demod_100hz();
    const double fs = 20.0 * cfg.f_mod_hz;
    const double a = 0.25;
    const auto out = demodulate(tone(a, cfg.f_mod_hz, fs, 0.05), cfg);
    CHECK_THAT(settled_mean(out, 3.0 * settling_time(cfg)),
               Catch::Matchers::WithinRel(a / std::sqrt(2.0), 0.01));
}

TEST_CASE("square reference reads 2A/pi") {
    auto cfg = demod_100hz();
    cfg.reference = DemodConfig::Reference::square;
    const double fs = 20.0 * cfg.f_mod_hz;
    const double a = 0.25;
    const auto out = demodulate(tone(a, cfg.f_mod_hz, fs, 0.05), cfg);
    CHECK_THAT(settled_mean(out, 3.0 * settling_time(cfg)),
               Catch::Matchers::WithinRel(2.0 * a / std::numbers::pi, 0.01));
}

TEST_CASE("quadrature rejection of at least 40 dB") {
    const auto cfg = demod_100hz();
    const double fs = 20.0 * cfg.f_mod_hz;
    const double a = 0.25;
    // 90 degrees out of phase with the reference
    const auto out = demodulate(tone(a, cfg.f_mod_hz, fs, 0.05, std::numbers::pi / 2.0), cfg);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out.time_at(i) >= 3.0 * settling_time(cfg))
            worst = std::max(worst, std::abs(out.values[i]));
    CHECK(worst < 0.01 * a / std::sqrt(2.0)); // -40 dB of the in-phase reading
}

TEST_CASE("off-band tone is attenuated per the filter gain") {
    const auto cfg = demod_100hz();
    const double fs = 20.0 * cfg.f_mod_hz;
    const double a = 0.25, delta = 300.0;
    const auto out = demodulate(tone(a, cfg.f_mod_hz + delta, fs, 0.08), cfg);
    const auto fit = fit_sine(trim_front(out, 0.03), delta);
    const double expected = a / std::sqrt(2.0) * lpf_gain(cfg, delta, fs);
    // within 1 dB
    CHECK(fit.amplitude_v / expected > std::pow(10.0, -1.0 / 20.0));
    CHECK(fit.amplitude_v / expected < std::pow(10.0, 1.0 / 20.0));
}

TEST_CASE("demodulation is linear") {
    const auto cfg = demod_100hz();
    const double fs = 20.0 * cfg.f_mod_hz;
    const auto x = tone(0.2, cfg.f_mod_hz, fs, 0.02);
    const auto y = tone(0.1, cfg.f_mod_hz + 500.0, fs, 0.02, 0.4);
    auto mix = x;
    for (std::size_t i = 0; i < mix.size(); ++i)
        mix.values[i] = 1.7 * x.values[i] - 0.3 * y.values[i];
    const auto dm = demodulate(mix, cfg);
    const auto dx = demodulate(x, cfg);
    const auto dy = demodulate(y, cfg);
    for (std::size_t i = 0; i < dm.size(); ++i)
        CHECK_THAT(dm.values[i], Catch::Matchers::WithinAbs(1.7 * dx.values[i] - 0.3 * dy.values[i],
                                                            1e-9));
}

TEST_CASE("settled output traces cos of the reference phase") {
    const double fs = 20.0 * 7.9e3;
    const double a = 0.25;
    for (double dphi : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        auto cfg = demod_100hz();
        cfg.phase_rad = dphi;
        const auto out = demodulate(tone(a, cfg.f_mod_hz, fs, 0.05), cfg);
        const double expected = a / std::sqrt(2.0) * std::cos(dphi);
        CHECK_THAT(settled_mean(out, 3.0 * settling_time(cfg)),
                   Catch::Matchers::WithinAbs(expected, 0.01 * a / std::sqrt(2.0)));
    }
}

TEST_CASE("demodulation preconditions") {
    auto cfg = demod_100hz();
    CHECK_THROWS_AS(demodulate(tone(0.1, 7.9e3, 5.0 * cfg.f_mod_hz, 0.01), cfg),
                    precondition_error);
    cfg.lpf_cutoff_hz = cfg.f_mod_hz; // not below f_mod/2
    CHECK_THROWS_AS(validate_demod(cfg), config_error);
    cfg = demod_100hz();
    cfg.lpf_order = 0;
    CHECK_THROWS_AS(validate_demod(cfg), config_error);
}

TEST_CASE("settling time bound") {
    auto cfg = demod_100hz();
    CHECK_THAT(settling_time(cfg), Catch::Matchers::WithinRel(7.0 / (kTwoPi * 100.0), 1e-12));
}

TEST_CASE("lpf_gain limits") {
    const auto cfg = demod_100hz();
    const double fs = 158e3;
    CHECK_THAT(lpf_gain(cfg, 0.0, fs), Catch::Matchers::WithinRel(1.0, 1e-9));
    // -3 dB per pole near the cutoff (digital pole sits close to analog here)
    CHECK_THAT(lpf_gain(cfg, cfg.lpf_cutoff_hz, fs),
               Catch::Matchers::WithinRel(std::pow(std::sqrt(0.5), 4.0), 0.02));
    CHECK(lpf_gain(cfg, 10.0 * cfg.lpf_cutoff_hz, fs) < 1.2e-4);
}

TEST_CASE("fit_sine recovers a clean sinusoid exactly") {
    auto ts = make_series(1000.0, 1000, "V");
    for (std::size_t i = 0; i < ts.size(); ++i)
        ts.values[i] = 0.3 * std::sin(kTwoPi * 5.0 * ts.time_at(i) + 0.7) + 0.05;
    const auto fit = fit_sine(ts, 5.0);
    CHECK_THAT(fit.amplitude_v, Catch::Matchers::WithinRel(0.3, 1e-9));
    CHECK_THAT(fit.phase_rad, Catch::Matchers::WithinAbs(0.7, 1e-9));
    CHECK_THAT(fit.offset_v, Catch::Matchers::WithinAbs(0.05, 1e-9));
    CHECK(fit.residual_rms_v < 1e-10);
}

TEST_CASE("fit_sine uncertainty tracks the noise level") {
    const double noise_rms = 0.01;
    auto ts = make_series(1000.0, 10000, "V");
    const auto noise = white_noise(noise_rms * std::sqrt(2.0 / 1000.0), 1000.0, ts.size(), 5);
    for (std::size_t i = 0; i < ts.size(); ++i)
        ts.values[i] = 0.3 * std::sin(kTwoPi * 5.0 * ts.time_at(i)) + noise.values[i];
    const auto fit = fit_sine(ts, 5.0);
    const double expected_sigma = noise_rms * std::sqrt(2.0 / double(ts.size()));
    CHECK_THAT(fit.amplitude_v, Catch::Matchers::WithinAbs(0.3, 5.0 * expected_sigma));
    CHECK_THAT(fit.amplitude_sigma_v, Catch::Matchers::WithinRel(expected_sigma, 0.3));
}

TEST_CASE("fit_sine needs at least two periods") {
    auto ts = make_series(1000.0, 100, "V"); // 0.1 s
    CHECK_THROWS_AS(fit_sine(ts, 5.0), precondition_error);
}

TEST_CASE("fit_responsivity on an exactly linear set") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= 8; ++i) pts.emplace_back(0.01 * i, 0.02 * i);
    const auto fit = fit_responsivity(pts);
    CHECK_THAT(fit.slope, Catch::Matchers::WithinRel(2.0, 1e-9));
    CHECK_THAT(fit.intercept_v, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK(fit.r_squared > 0.999999);
    CHECK(fit.n_used == 8);
    CHECK(fit.linear_range_max == 0.08);
}

TEST_CASE("fit_responsivity cuts a saturating tail") {
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= 6; ++i) pts.emplace_back(0.1 * i, 0.2 * i);
    pts.emplace_back(1.0, 1.0);  // saturated: linear model predicts 2.0
    pts.emplace_back(2.0, 1.05);
    const auto fit = fit_responsivity(pts);
    CHECK(fit.n_used == 6);
    CHECK_THAT(fit.slope, Catch::Matchers::WithinRel(2.0, 1e-9));
    CHECK(fit.linear_range_max == Catch::Approx(0.6));
}

TEST_CASE("fit_responsivity preconditions") {
    std::vector<std::pair<double, double>> three = {{1, 1}, {2, 2}, {3, 3}};
    CHECK_THROWS_AS(fit_responsivity(three), fit_error);
    std::vector<std::pair<double, double>> unsorted = {{1, 1}, {3, 3}, {2, 2}, {4, 4}};
    CHECK_THROWS_AS(fit_responsivity(unsorted), fit_error);
    // no 4-point linear prefix
    std::vector<std::pair<double, double>> jumpy = {{1, 1}, {2, 5}, {3, 2}, {4, 9}};
    CHECK_THROWS_AS(fit_responsivity(jumpy), fit_error);
}
