#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jcent {

enum class ErrorCode {
    invalid_alpha,
    invalid_parameter,
    cutoff_too_small,
    insufficient_nu,
    invalid_n,
    dimension_overflow,
    not_a_state,
    shape_mismatch,
    degenerate_span,
    insufficient_horizon,
    invalid_grid,
    invalid_config,
    unknown_figure,
    io_failure,
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_alpha: return "invalid-alpha";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::cutoff_too_small: return "cutoff-too-small";
    case ErrorCode::insufficient_nu: return "insufficient-nu";
    case ErrorCode::invalid_n: return "invalid-N";
    case ErrorCode::dimension_overflow: return "dimension-overflow";
    case ErrorCode::not_a_state: return "not-a-state";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::degenerate_span: return "degenerate-span";
    case ErrorCode::insufficient_horizon: return "insufficient-horizon";
    case ErrorCode::invalid_grid: return "invalid-grid";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::unknown_figure: return "unknown-figure";
    case ErrorCode::io_failure: return "io-failure";
    }
    return "unknown";
}

// All library failures surface as this exception; code() identifies the
// failure class, what() carries a human-readable message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace jcent
