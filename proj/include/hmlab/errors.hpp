#pragma once

#include <stdexcept>
#include <string>

namespace hmlab {

// Exit-code mapping used by the CLI: usage 2, certification/calibration 3,
// indeterminacy 4.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& m) : std::runtime_error(m) {}
};

struct ParameterError : UsageError {
    explicit ParameterError(const std::string& m) : UsageError(m) {}
};

struct ResolutionError : UsageError {
    explicit ResolutionError(const std::string& m) : UsageError(m) {}
};

struct PreconditionError : std::runtime_error {
    explicit PreconditionError(const std::string& m) : std::runtime_error(m) {}
};

struct CertificationError : std::runtime_error {
    explicit CertificationError(const std::string& m) : std::runtime_error(m) {}
};

struct CalibrationError : CertificationError {
    explicit CalibrationError(const std::string& m) : CertificationError(m) {}
};

struct CorkscrewViolation : CertificationError {
    explicit CorkscrewViolation(const std::string& m) : CertificationError(m) {}
};

struct IndeterminacyError : std::runtime_error {
    explicit IndeterminacyError(const std::string& m) : std::runtime_error(m) {}
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& m) : std::runtime_error(m) {}
};

} // namespace hmlab
