#pragma once

#include <stdexcept>
#include <string>

namespace adbench {

/// Invalid configuration or precondition violation caught before any work starts.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Malformed input file; message carries the file and line where parsing stopped.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical blow-up (NaN/Inf) during training; the experiment is recorded as failed.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem / IO failure.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace adbench
