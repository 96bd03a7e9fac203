#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rydtwin/errors.hpp"

namespace rydtwin {

/// Uniformly sampled real-valued trace.
struct TimeSeries {
    double fs_hz = 0.0;   ///< sample rate
    double t0_s = 0.0;    ///< time of the first sample
    std::string units;    ///< e.g. "V", "V/cm"
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double dt() const { return 1.0 / fs_hz; }
    double time_at(std::size_t i) const { return t0_s + static_cast<double>(i) / fs_hz; }
    double duration() const { return static_cast<double>(values.size()) / fs_hz; }
};

inline TimeSeries make_series(double fs_hz, std::size_t n, std::string units, double t0 = 0.0) {
    if (!(fs_hz > 0.0)) throw precondition_error("TimeSeries: sample rate must be positive");
    TimeSeries ts;
    ts.fs_hz = fs_hz;
    ts.t0_s = t0;
    ts.units = std::move(units);
    ts.values.assign(n, 0.0);
    return ts;
}

/// Drops the first `seconds` of a trace (used to discard filter settling).
inline TimeSeries trim_front(const TimeSeries& ts, double seconds) {
    auto skip = static_cast<std::size_t>(std::ceil(seconds * ts.fs_hz));
    if (skip >= ts.size()) throw precondition_error("trim_front: nothing left after trimming");
    TimeSeries out;
    out.fs_hz = ts.fs_hz;
    out.t0_s = ts.t0_s + static_cast<double>(skip) / ts.fs_hz;
    out.units = ts.units;
    out.values.assign(ts.values.begin() + static_cast<std::ptrdiff_t>(skip), ts.values.end());
    return out;
}

} // namespace rydtwin
