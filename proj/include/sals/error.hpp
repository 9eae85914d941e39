#pragma once

#include <stdexcept>
#include <string>

namespace sals {

enum class ErrorCode {
    invalid_scale,
    out_of_range,
    dimension_mismatch,
    incompatible_scales,
    invalid_argument,
    numeric,
    divergence_infinite,
    parse,
    validation,
    degenerate_split,
    training_diverged,
    config,
    io,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_scale: return "invalid-scale";
        case ErrorCode::out_of_range: return "out-of-range";
        case ErrorCode::dimension_mismatch: return "dimension-mismatch";
        case ErrorCode::incompatible_scales: return "incompatible-scales";
        case ErrorCode::invalid_argument: return "invalid-argument";
        case ErrorCode::numeric: return "numeric";
        case ErrorCode::divergence_infinite: return "divergence-infinite";
        case ErrorCode::parse: return "parse";
        case ErrorCode::validation: return "validation";
        case ErrorCode::degenerate_split: return "degenerate-split";
        case ErrorCode::training_diverged: return "training-diverged";
        case ErrorCode::config: return "config";
        case ErrorCode::io: return "io";
    }
    return "unknown";
}

/// Every library failure throws this; code() identifies the failure class.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

}  // namespace detail

}  // namespace sals
