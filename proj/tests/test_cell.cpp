#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "rydtwin/cell.hpp"

using namespace rydtwin;

namespace {

TimeSeries constant_series(double level, double fs, double duration) {
    auto s = make_series(fs, static_cast<std::size_t>(duration * fs), "V/cm");
    for (auto& v : s.values) v = level;
    return s;
}

// Time at which the internal field first drops below half the step amplitude.
double half_recovery_time(const CellModel& cell, double step, double fs, double duration) {
    ScreeningState st;
    const auto internal = screen(constant_series(step, fs, duration), cell, st);
    for (std::size_t i = 1; i < internal.size(); ++i) {
        if (internal.values[i] <= 0.5 * step) {
            const double frac =
                (internal.values[i - 1] - 0.5 * step) / (internal.values[i - 1] - internal.values[i]);
            return internal.time_at(i - 1) + frac * internal.dt();
        }
    }
    return -1.0;
}

} // namespace

TEST_CASE("tau_for_amplitude interpolates and clamps") {
    const auto cell = paraffin_cell();
    CHECK_THAT(tau_for_amplitude(cell, 0.354), Catch::Matchers::WithinRel(1.0e-4, 1e-12));
    CHECK_THAT(tau_for_amplitude(cell, 0.833), Catch::Matchers::WithinRel(6.0e-4, 1e-12));
    // midpoint
    const double mid = 0.5 * (0.354 + 0.833);
    CHECK_THAT(tau_for_amplitude(cell, mid), Catch::Matchers::WithinRel(3.5e-4, 1e-12));
    // clamped at endpoints
    CHECK_THAT(tau_for_amplitude(cell, 0.1), Catch::Matchers::WithinRel(1.0e-4, 1e-12));
    CHECK_THAT(tau_for_amplitude(cell, 2.0), Catch::Matchers::WithinRel(6.0e-4, 1e-12));
    CHECK_THROWS_AS(tau_for_amplitude(cell, -0.1), precondition_error);
}

TEST_CASE("uncoated cell single calibration point") {
    const auto cell = uncoated_cell();
    CHECK_THAT(tau_for_amplitude(cell, 0.2), Catch::Matchers::WithinRel(10e-6, 1e-12));
    CHECK_THAT(tau_for_amplitude(cell, 5.0), Catch::Matchers::WithinRel(10e-6, 1e-12));
}

TEST_CASE("step reads half amplitude at tau_half") {
    struct Case {
        CellModel cell;
        double step;
        double tau;
    };
    const std::vector<Case> cases = {
        {uncoated_cell(), 0.833, 10e-6},
        {paraffin_cell(), 0.354, 1.0e-4},
        {paraffin_cell(), 0.833, 6.0e-4},
    };
    for (const auto& c : cases) {
        const double fs = 400.0 / c.tau;
        const double t_half = half_recovery_time(c.cell, c.step, fs, 5.0 * c.tau);
        REQUIRE(t_half > 0.0);
        CHECK_THAT(t_half, Catch::Matchers::WithinRel(c.tau, 0.01));
    }
}

TEST_CASE("screen enforces dt precondition") {
    ScreeningState st;
    // uncoated: tau_decay ~= 14.4 us, so dt = 5 us violates dt <= tau_decay/10
    CHECK_THROWS_AS(screen(constant_series(0.8, 2e5, 1e-4), uncoated_cell(), st),
                    precondition_error);
}

TEST_CASE("zero applied field stays zero") {
    ScreeningState st;
    const auto internal = screen(constant_series(0.0, 1e6, 1e-4), paraffin_cell(), st);
    for (double v : internal.values) CHECK(v == 0.0);
}

TEST_CASE("internal field decays exponentially after a step") {
    const double step = 0.354;
    const double tau_decay = 1.0e-4 / std::log(2.0);
    ScreeningState st;
    const double fs = 1e7;
    const auto internal = screen(constant_series(step, fs, 2e-4), paraffin_cell(), st);
    for (std::size_t i = 0; i < internal.size(); ++i) {
        CHECK_THAT(internal.values[i],
                   Catch::Matchers::WithinRel(step * std::exp(-internal.time_at(i) / tau_decay), 1e-9));
    }
}

TEST_CASE("square drive reaches known steady-state swing") {
    // Closed form for a bipolar square of amplitude E0 and half-period H
    // through a first-order high-pass: |internal| just after each edge settles
    // to 2 E0 / (1 + exp(-H/tau_decay)).
    const double e0 = 0.354;
    const double tau_decay = 1.0e-4 / std::log(2.0);
    const double f = 7.9e3;
    const double half = 0.5 / f;
    const double fs = 400.0 * f;
    auto applied = make_series(fs, static_cast<std::size_t>(0.01 * fs), "V/cm");
    for (std::size_t i = 0; i < applied.size(); ++i) {
        const double phase = std::fmod(applied.time_at(i) * f, 1.0);
        applied.values[i] = phase < 0.5 ? e0 : -e0;
    }
    ScreeningState st;
    const auto internal = screen(applied, paraffin_cell(), st);
    double peak = 0.0;
    for (std::size_t i = 0; i < internal.size(); ++i)
        if (internal.time_at(i) > 0.008) peak = std::max(peak, std::abs(internal.values[i]));
    const double expected = 2.0 * e0 / (1.0 + std::exp(-half / tau_decay));
    CHECK_THAT(peak, Catch::Matchers::WithinRel(expected, 0.01));
}

TEST_CASE("high-pass transfer magnitude on a sine") {
    // Steady-state gain at frequency f is wt/sqrt(1+wt^2), w = 2*pi*f,
    // t = tau_decay. Low amplitudes hold tau at the lower calibration point.
    const double tau_decay = 1.0e-4 / std::log(2.0);
    const double a0 = 0.354;
    for (double f : {100.0, 1000.0, 10000.0}) {
        const double fs = std::max(4e6, 400.0 * f);
        const double duration = 10.0 / f + 20.0 * tau_decay;
        auto applied = make_series(fs, static_cast<std::size_t>(duration * fs), "V/cm");
        for (std::size_t i = 0; i < applied.size(); ++i)
            applied.values[i] = a0 * std::sin(2.0 * std::numbers::pi * f * applied.time_at(i));
        ScreeningState st;
        const auto internal = screen(applied, paraffin_cell(), st);
        double peak = 0.0;
        const double t_meas = duration - 2.0 / f;
        for (std::size_t i = 0; i < internal.size(); ++i)
            if (internal.time_at(i) > t_meas) peak = std::max(peak, std::abs(internal.values[i]));
        const double wt = 2.0 * std::numbers::pi * f * tau_decay;
        const double expected = a0 * wt / std::sqrt(1.0 + wt * wt);
        CHECK_THAT(peak, Catch::Matchers::WithinRel(expected, 0.01));
    }
}

TEST_CASE("validate_cell rejects malformed calibrations") {
    CellModel empty{CellModel::Kind::paraffin, {}, 1.5};
    CHECK_THROWS_AS(validate_cell(empty), config_error);
    CellModel bad_tau{CellModel::Kind::paraffin, {{0.3, -1e-4}}, 1.5};
    CHECK_THROWS_AS(validate_cell(bad_tau), config_error);
    CellModel unsorted{CellModel::Kind::paraffin, {{0.8, 1e-4}, {0.3, 2e-4}}, 1.5};
    CHECK_THROWS_AS(validate_cell(unsorted), config_error);
}
