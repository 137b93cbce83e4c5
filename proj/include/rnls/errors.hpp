#pragma once

#include <stdexcept>
#include <string>

namespace rnls {

// Error taxonomy mirrors the CLI exit codes: configuration problems,
// solver failures and diverged/invalid states are distinguishable by type.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct ConvergenceError : SolverError {
    double last_residual;
    ConvergenceError(const std::string& what, double res)
        : SolverError(what + " (last residual " + std::to_string(res) + ")"), last_residual(res) {}
};

struct DivergedStateError : std::runtime_error {
    double at_time;
    explicit DivergedStateError(const std::string& what, double t = 0.0)
        : std::runtime_error(what), at_time(t) {}
};

struct ResolutionError : std::runtime_error {
    explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

struct NoProjectionError : std::runtime_error {
    explicit NoProjectionError(const std::string& what) : std::runtime_error(what) {}
};

struct UndefinedGapError : std::runtime_error {
    explicit UndefinedGapError(const std::string& what) : std::runtime_error(what) {}
};

struct UnreliableVarianceError : std::runtime_error {
    explicit UnreliableVarianceError(const std::string& what) : std::runtime_error(what) {}
};

struct VerificationError : SolverError {
    explicit VerificationError(const std::string& what) : SolverError(what) {}
};

struct NotApplicableError : std::runtime_error {
    explicit NotApplicableError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace rnls
