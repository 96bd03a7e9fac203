#pragma once

#include <stdexcept>
#include <string>

namespace rydtwin {

/// Invalid model/scenario configuration (bad tau table, zero plate gap, ...).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Violated runtime precondition (sample rate too low, axis unsorted, ...).
struct precondition_error : std::invalid_argument {
    explicit precondition_error(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A fit could not be performed on the given data.
struct fit_error : std::runtime_error {
    explicit fit_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rydtwin
