#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>

#include "rydtwin/experiments.hpp"

using namespace rydtwin;

namespace {
Scenario noiseless_10hz() {
    Scenario s;
    s.signal = signal_sine(0.01, 10.0);
    return s;
}
} // namespace

TEST_CASE("resolve fills the derived quantities") {
    const auto r = resolve(noiseless_10hz());
    CHECK(r.op.f_mod_hz == 7.9e3);
    CHECK(r.demod.f_mod_hz == 7.9e3);
    CHECK_THAT(r.demod.lpf_cutoff_hz, Catch::Matchers::WithinRel(12.65, 1e-12));
    CHECK(r.fs_hz == 20.0 * 7.9e3);
    const double settle = settling_time(r.demod);
    CHECK_THAT(r.duration_s, Catch::Matchers::WithinRel(kFitTrimSettlings * settle + 0.22, 1e-12));
    // explicit values survive
    Scenario s = noiseless_10hz();
    s.op.f_mod_hz = 27.9e3;
    s.fs_hz = 600e3;
    CHECK(resolve(s).fs_hz == 600e3);
    CHECK(resolve(s).op.f_mod_hz == 27.9e3);
}

TEST_CASE("resolve rejects inconsistent scenarios") {
    Scenario s = noiseless_10hz();
    s.signal.frequency_hz = 0.0;
    CHECK_THROWS_AS(resolve(s), config_error);
    s = noiseless_10hz();
    s.fs_hz = 5.0 * 7.9e3; // below 10 f_mod
    CHECK_THROWS_AS(resolve(s), config_error);
    s = noiseless_10hz();
    s.duration_s = 0.05; // under two signal periods
    CHECK_THROWS_AS(resolve(s), config_error);
}

TEST_CASE("run_sensing output is linear in a small signal") {
    Scenario s = noiseless_10hz();
    const auto r1 = run_sensing(s);
    CHECK(r1.fit.amplitude_v > 0.0);
    CHECK_FALSE(r1.fmod_below_floor);
    s.signal.amplitude_v_per_cm = 0.02;
    const auto r2 = run_sensing(s);
    CHECK_THAT(r2.fit.amplitude_v / r1.fit.amplitude_v, Catch::Matchers::WithinRel(2.0, 0.01));
}

TEST_CASE("zero signal amplitude produces no false tone") {
    Scenario s = noiseless_10hz();
    s.signal.amplitude_v_per_cm = 0.0;
    s.noise.white_nsd = 0.9e-6;
    s.seed = 3;
    const auto r = run_sensing(s);
    CHECK(r.fit.amplitude_v < 3.0 * r.fit.amplitude_sigma_v);
}

TEST_CASE("run_sensing is deterministic per seed") {
    Scenario s = noiseless_10hz();
    s.noise.white_nsd = 0.9e-6;
    s.noise.flicker_nsd_at_1hz = 2.0e-6;
    s.seed = 99;
    const auto a = run_sensing(s);
    const auto b = run_sensing(s);
    CHECK(a.fit.amplitude_v == b.fit.amplitude_v);
    CHECK(a.demod_v.values == b.demod_v.values);
    s.seed = 100;
    const auto c = run_sensing(s);
    CHECK(a.fit.amplitude_v != c.fit.amplitude_v);
}

TEST_CASE("run_sensing flags modulation below the 4 kHz floor") {
    Scenario s = noiseless_10hz();
    s.op.f_mod_hz = 3.0e3;
    s.fs_hz = 120e3; // keep the screening step fine enough
    CHECK(run_sensing(s).fmod_below_floor);
}

TEST_CASE("worker count resolution order") {
    unsetenv("RYDBERG_TWIN_THREADS");
    CHECK(resolve_worker_count(3) == 3);
    CHECK(resolve_worker_count() >= 1);
    setenv("RYDBERG_TWIN_THREADS", "2", 1);
    CHECK(resolve_worker_count() == 2);
    CHECK(resolve_worker_count(5) == 5); // explicit request wins
    unsetenv("RYDBERG_TWIN_THREADS");
}

TEST_CASE("grid_scan is independent of the worker count") {
    const std::vector<double> e_axis = {0.3, 0.354, 0.4};
    const std::vector<double> dp_axis = {220.0, 243.0, 260.0};
    Scenario base = noiseless_10hz();
    base.noise.white_nsd = 0.9e-6;
    const auto g1 = grid_scan(e_axis, dp_axis, base, 1);
    const auto g4 = grid_scan(e_axis, dp_axis, base, 4);
    for (std::size_t i = 0; i < e_axis.size(); ++i)
        for (std::size_t j = 0; j < dp_axis.size(); ++j)
            CHECK(g1.metric_v[i][j] == g4.metric_v[i][j]);
    CHECK(g1.max_metric > 0.0);
}

TEST_CASE("grid_scan records failed cells as NaN") {
    const std::vector<double> e_axis = {0.354};
    const std::vector<double> dp_axis = {243.0, std::numeric_limits<double>::quiet_NaN()};
    const auto g = grid_scan(e_axis, dp_axis, noiseless_10hz(), 1);
    CHECK(std::isfinite(g.metric_v[0][0]));
    CHECK(std::isnan(g.metric_v[0][1]));
    CHECK_THROWS_AS(grid_scan({}, dp_axis, noiseless_10hz(), 1), precondition_error);
}

TEST_CASE("responsivity sweep finds the linear region and the saturation cut") {
    std::vector<double> amplitudes;
    for (int i = 0; i < 10; ++i)
        amplitudes.push_back(0.01 * std::pow(20.0 / 0.01, double(i) / 9.0));
    const auto sweep = responsivity_sweep(10.0, amplitudes, noiseless_10hz());
    CHECK(sweep.fit.slope > 0.0);
    CHECK(sweep.fit.r_squared > 0.99);
    CHECK(sweep.fit.linear_range_max < amplitudes.back());
    CHECK(sweep.fit.n_used >= 4);
    CHECK_THROWS_AS(responsivity_sweep(10.0, {0.01, 0.02}, noiseless_10hz()),
                    precondition_error);
}

TEST_CASE("direct sensing responds at twice the signal frequency") {
    Scenario base; // noiseless
    const auto r = direct_sensing(5000.0, 0.1, -7.0, base);
    CHECK(r.fit.amplitude_v > 0.0);
    // the same tone fitted at f instead of 2f is far weaker
    auto pd = r.pd_v;
    const auto at_f = fit_sine(pd, 5000.0);
    CHECK(at_f.amplitude_v < 0.05 * r.fit.amplitude_v);
}

TEST_CASE("sensitivity report composes the noise budget") {
    NsdSchedule sched;
    sched.lia_anchor_at_1hz = 2.0e-6;
    const auto report = sensitivity_report({10.0, 1000.0}, {0.05, 0.5}, sched);
    REQUIRE(report.rows.size() == 2);
    const auto& r10 = report.rows[0];
    CHECK(r10.f_mod_hz == 7.9e3);
    CHECK(r10.nsd_pd == 0.9e-6);
    CHECK_THAT(r10.nsd_lia, Catch::Matchers::WithinRel(2e-6 * std::pow(10.0, -0.7), 1e-12));
    CHECK_THAT(r10.sensitivity,
               Catch::Matchers::WithinRel(std::hypot(r10.nsd_pd, r10.nsd_lia) / 0.05, 1e-12));
    const auto& r1k = report.rows[1];
    CHECK(r1k.f_mod_hz == 27.9e3);
    CHECK(r1k.nsd_pd == 2.57e-6);
    CHECK_THROWS_AS(sensitivity_report({10.0}, {0.1, 0.2}, sched), precondition_error);
    CHECK_THROWS_AS(sensitivity_report({10.0}, {0.0}, sched), precondition_error);
}

TEST_CASE("dipole baseline power law") {
    const DipoleBaseline d;
    CHECK_THAT(dipole_baseline(1000.0, d), Catch::Matchers::WithinRel(d.s0_v_per_cm_sqrthz, 1e-12));
    CHECK(dipole_baseline(10.0, d) > dipole_baseline(100.0, d));
    CHECK_THAT(dipole_baseline(10.0, d),
               Catch::Matchers::WithinRel(4.0e-6 * std::pow(100.0, 1.42), 1e-12));
    CHECK_THROWS_AS(dipole_baseline(0.0, d), precondition_error);
}
