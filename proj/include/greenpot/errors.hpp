#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace greenpot {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid construction or solver parameter (bad exponent, bad grid size, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Configuration file or CLI problem.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Problem has no well-posed solution (no boundary contact, mismatched domains, ...).
class IllPosedError : public Error {
public:
    using Error::Error;
};

/// Degenerate input for an operation that needs nontrivial data
/// (empty level set, constant field where a ratio is requested, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Requested problem exceeds the configured memory budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

/// Iteration limit was hit before both solver tolerances held.
/// Carries the best iterate so downstream diagnostics stay computable.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> best,
                        double residual, double energy)
        : Error(what), best_values(std::move(best)),
          final_residual(residual), final_energy(energy) {}

    std::vector<double> best_values;
    double final_residual;
    double final_energy;
};

} // namespace greenpot
