// error.hpp: exception types shared by all relax modules

#pragma once

#include <stdexcept>
#include <string>

namespace relax {

enum class Errc {
    undefined_at_zero,
    non_finite_input,
    divergent_gamma_zero,
    out_of_range,
    length_mismatch,
    scale_exceeded,
    integration_failure,
    unreachable_target,
    insufficient_points,
    no_peak,
    grid_too_coarse,
    invalid_argument,
};

const char* to_string(Errc code) noexcept;

// Numerical or domain failure raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Bad or unknown configuration, detected before any computation (exit code 1).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const char* to_string(Errc code) noexcept {
    switch (code) {
        case Errc::undefined_at_zero: return "undefined-at-zero";
        case Errc::non_finite_input: return "non-finite-input";
        case Errc::divergent_gamma_zero: return "divergent-gamma-zero";
        case Errc::out_of_range: return "out-of-range";
        case Errc::length_mismatch: return "length-mismatch";
        case Errc::scale_exceeded: return "scale-exceeded";
        case Errc::integration_failure: return "integration-failure";
        case Errc::unreachable_target: return "unreachable-target";
        case Errc::insufficient_points: return "insufficient-points";
        case Errc::no_peak: return "no-peak";
        case Errc::grid_too_coarse: return "grid-too-coarse";
        case Errc::invalid_argument: return "invalid-argument";
    }
    return "unknown";
}

} // namespace relax
