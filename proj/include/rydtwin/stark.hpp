#pragma once

#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "rydtwin/errors.hpp"

namespace rydtwin {

/// Magnetic sublevel group of the 60D5/2 state. +mj and -mj share one branch.
enum class MjBranch { half, three_half, five_half };

inline const char* to_string(MjBranch b) {
    switch (b) {
        case MjBranch::half: return "mj12";
        case MjBranch::three_half: return "mj32";
        case MjBranch::five_half: return "mj52";
    }
    return "?";
}

/// One mj sublevel with its DC polarizability and population weight.
struct RydbergBranch {
    MjBranch mj = MjBranch::half;
    double alpha_mhz_cm2_v2 = 0.0; ///< DC polarizability, MHz cm^2/V^2
    double weight = 0.0;           ///< population fraction in [0,1]
};

/// ARC-computed polarizabilities of Cs 60D5/2 and the default population split
/// (most atoms sit in the mj = 1/2, 3/2 branches for vertical polarization).
inline std::array<RydbergBranch, 3> default_branches() {
    return {{{MjBranch::half, -4985.0, 0.4},
             {MjBranch::three_half, -3624.0, 0.4},
             {MjBranch::five_half, 281.0, 0.2}}};
}

template <typename Branches>
void validate_branches(const Branches& branches) {
    double wsum = 0.0;
    for (const auto& b : branches) {
        if (!std::isfinite(b.alpha_mhz_cm2_v2) || b.alpha_mhz_cm2_v2 == 0.0)
            throw config_error("RydbergBranch: polarizability must be finite and nonzero");
        if (!(b.weight >= 0.0 && b.weight <= 1.0))
            throw config_error("RydbergBranch: weight must lie in [0,1]");
        wsum += b.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw config_error("RydbergBranch: weights must sum to 1");
}

/// Quadratic Stark shift, df = -(alpha/2) E^2, in MHz for E in V/cm.
inline double stark_shift(double field_v_per_cm, const RydbergBranch& branch) {
    if (!std::isfinite(field_v_per_cm))
        throw precondition_error("stark_shift: field must be finite");
    return -0.5 * branch.alpha_mhz_cm2_v2 * field_v_per_cm * field_v_per_cm;
}

/// Branch shifts tabulated over a field axis.
struct StarkMap {
    std::vector<double> field_axis_v_per_cm;
    std::vector<RydbergBranch> branches;
    std::vector<std::vector<double>> shifts_mhz; ///< [branch][field index]
};

template <typename Branches>
StarkMap stark_map(const std::vector<double>& field_axis, const Branches& branches) {
    if (field_axis.empty()) throw precondition_error("stark_map: empty field axis");
    for (std::size_t i = 0; i < field_axis.size(); ++i) {
        if (!std::isfinite(field_axis[i]))
            throw precondition_error("stark_map: field axis must be finite");
        if (i > 0 && field_axis[i] < field_axis[i - 1])
            throw precondition_error("stark_map: field axis must be sorted ascending");
    }
    StarkMap map;
    map.field_axis_v_per_cm = field_axis;
    map.branches.assign(std::begin(branches), std::end(branches));
    map.shifts_mhz.reserve(map.branches.size());
    for (const auto& b : map.branches) {
        std::vector<double> row;
        row.reserve(field_axis.size());
        for (double e : field_axis) row.push_back(stark_shift(e, b));
        map.shifts_mhz.push_back(std::move(row));
    }
    return map;
}

} // namespace rydtwin
