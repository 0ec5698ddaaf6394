#pragma once

#include <stdexcept>
#include <string>

namespace fairprice {

enum class ErrorKind {
    Parameter,      // invalid family / policy parameter
    Configuration,  // grid, tolerance or CLI misconfiguration
    Domain,         // argument outside the support or band below cost
    Bracket,        // root bracket without a sign change
    Convergence,    // iteration budget exhausted
    Accuracy,       // quadrature depth exhausted
    Divergence,     // non-finite mean
    Regularity,     // no stationary point where one must exist
    PolicyRange,    // epsilon beyond the perfect-discrimination range
    EmptyMarket,    // S(c) = 0
    Capability,     // model lacks pdf derivative
    Matching,       // CS level not attainable under the difference policy
    Consistency,    // CS + PS != TS
    Parse,          // malformed CSV or model file
    Data,           // empty or degenerate dataset
    Separation,     // perfectly separated logistic data
    Sign,           // fitted slope is not negative
};

const char* to_string(ErrorKind kind) noexcept;

/// Exit code contract of the CLI: 2 configuration, 3 numeric/regularity, 4 data.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace fairprice
