#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "rydtwin/errors.hpp"
#include "rydtwin/experiments.hpp"
#include "rydtwin/noise.hpp"
#include "rydtwin/spectroscopy.hpp"
#include "rydtwin/stark.hpp"
#include "rydtwin/timeseries.hpp"

namespace rydtwin {

/// Fixed-format number rendering so identical runs give byte-identical files.
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline void write_stark_map_csv(const StarkMap& map, std::ostream& os) {
    os << "field_V_per_cm";
    for (const auto& b : map.branches) os << ",shift_" << to_string(b.mj) << "_MHz";
    os << "\n";
    for (std::size_t i = 0; i < map.field_axis_v_per_cm.size(); ++i) {
        os << fmt_num(map.field_axis_v_per_cm[i]);
        for (const auto& row : map.shifts_mhz) os << "," << fmt_num(row[i]);
        os << "\n";
    }
}

inline void write_transient_csv(const TimeSeries& applied, const TimeSeries& internal,
                                std::ostream& os) {
    if (applied.size() != internal.size())
        throw precondition_error("write_transient_csv: trace lengths differ");
    os << "time_s,applied_V_per_cm,internal_V_per_cm\n";
    for (std::size_t i = 0; i < applied.size(); ++i)
        os << fmt_num(applied.time_at(i)) << "," << fmt_num(applied.values[i]) << ","
           << fmt_num(internal.values[i]) << "\n";
}

inline void write_detuning_map_csv(const DetuningTransientMap& map, std::ostream& os) {
    os << "delta_p_MHz";
    for (std::size_t c = 0; c < map.columns(); ++c) os << "," << fmt_num(map.time_at(c));
    os << "\n";
    for (std::size_t r = 0; r < map.detuning_axis_mhz.size(); ++r) {
        os << fmt_num(map.detuning_axis_mhz[r]);
        for (double v : map.voltage_v[r]) os << "," << fmt_num(v);
        os << "\n";
    }
}

inline void write_series_csv(const TimeSeries& ts, const std::string& value_header,
                             std::ostream& os) {
    os << "time_s," << value_header << "\n";
    for (std::size_t i = 0; i < ts.size(); ++i)
        os << fmt_num(ts.time_at(i)) << "," << fmt_num(ts.values[i]) << "\n";
}

inline void write_asd_csv(const AsdEstimate& est, std::ostream& os) {
    os << "freq_Hz,asd_V_per_sqrtHz\n";
    for (std::size_t i = 0; i < est.freq_hz.size(); ++i)
        os << fmt_num(est.freq_hz[i]) << "," << fmt_num(est.asd[i]) << "\n";
}

inline void write_grid_csv(const OperatingGrid& grid, std::ostream& os) {
    os << "e_aux_V_per_cm";
    for (double dp : grid.delta_p_axis) os << ",dp_" << fmt_num(dp) << "_MHz";
    os << "\n";
    for (std::size_t i = 0; i < grid.e_aux_axis.size(); ++i) {
        os << fmt_num(grid.e_aux_axis[i]);
        for (double v : grid.metric_v[i]) os << "," << fmt_num(v);
        os << "\n";
    }
}

inline void write_sensitivity_csv(const SensitivityReport& report, std::ostream& os) {
    os << "f_Hz,f_mod_Hz,m_V_per_V_per_cm,nsd_pd_V_per_sqrtHz,nsd_lia_V_per_sqrtHz,"
          "nsd_total_V_per_sqrtHz,s_e_V_per_cm_per_sqrtHz\n";
    for (const auto& r : report.rows)
        os << fmt_num(r.f_hz) << "," << fmt_num(r.f_mod_hz) << "," << fmt_num(r.responsivity)
           << "," << fmt_num(r.nsd_pd) << "," << fmt_num(r.nsd_lia) << "," << fmt_num(r.nsd_total)
           << "," << fmt_num(r.sensitivity) << "\n";
}

/// FNV-1a 64-bit; used to derive output file names from resolved scenarios.
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hash_tag(const std::string& s) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw config_error("cannot open output file: " + path);
    os << content;
}

} // namespace rydtwin
