#pragma once

#include <stdexcept>
#include <string>

namespace ekman {

// Bad run setup: grid mismatch, invalid parameter combinations, schema violations.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A field broke a structural invariant (e.g. nonzero mean fed to biot_savart).
struct invariant_error : std::runtime_error {
    explicit invariant_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Time stepping refused to proceed (CFL guard).
struct step_error : std::runtime_error {
    explicit step_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Field values became non-finite or exceeded the blow-up threshold.
struct divergence_error : std::runtime_error {
    explicit divergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Samples fed out of order, or a statistic queried before it is defined.
struct ordering_error : std::logic_error {
    explicit ordering_error(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace ekman
