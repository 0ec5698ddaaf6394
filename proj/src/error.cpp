#include "fairprice/error.hpp"

namespace fairprice {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parameter: return "parameter";
        case ErrorKind::Configuration: return "configuration";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Bracket: return "bracket";
        case ErrorKind::Convergence: return "convergence";
        case ErrorKind::Accuracy: return "accuracy";
        case ErrorKind::Divergence: return "divergence";
        case ErrorKind::Regularity: return "regularity";
        case ErrorKind::PolicyRange: return "policy_range";
        case ErrorKind::EmptyMarket: return "empty_market";
        case ErrorKind::Capability: return "capability";
        case ErrorKind::Matching: return "matching";
        case ErrorKind::Consistency: return "consistency";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Data: return "data";
        case ErrorKind::Separation: return "separation";
        case ErrorKind::Sign: return "sign";
    }
    return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parameter:
        case ErrorKind::Configuration:
        case ErrorKind::PolicyRange:
            return 2;
        case ErrorKind::Parse:
        case ErrorKind::Data:
        case ErrorKind::Separation:
        case ErrorKind::Sign:
            return 4;
        default:
            return 3;
    }
}

}  // namespace fairprice
