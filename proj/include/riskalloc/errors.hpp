#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace riskalloc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the domain of an operation (bad probability, negative capital, ...).
struct DomainError : Error {
    using Error::Error;
};

// Generalized-Erlang coefficients require pairwise distinct rates.
struct DistinctRatesRequired : Error {
    using Error::Error;
};

// Marshall-Olkin closed forms divide by beta1-lambda2 and lambda1-beta2.
struct SingularParameters : Error {
    using Error::Error;
};

// Degenerate asymptotic allocations need a unique riskiest branch.
struct TiedRiskiestBranch : Error {
    using Error::Error;
};

struct BracketError : Error {
    using Error::Error;
};

// Carries the last iterate so callers (sweeps, CLI) can report diagnostics.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, std::vector<double> iterate, double norm)
        : Error(msg), last_iterate(std::move(iterate)), residual_norm(norm) {}

    std::vector<double> last_iterate;
    double residual_norm;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace riskalloc
