#pragma once

#include <stdexcept>
#include <string>

namespace warpclust {

enum class ErrorCode {
    invalid_knots,
    singular_fit,
    unsupported_degree,
    invalid_parameter,
    monotonicity_violation,
    degenerate_curve,
    range_error,
    zero_variance,
    missing_similarities,
    degenerate_seminorm,
    internal_consistency,
    undefined_index,
    element_mismatch,
    configuration,
    degenerate_data,
    invalid_input,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

    /// Constant curves, zero variance and all-ones similarity spectra.
    [[nodiscard]] bool is_degenerate_data() const noexcept {
        return code_ == ErrorCode::degenerate_curve || code_ == ErrorCode::zero_variance ||
               code_ == ErrorCode::degenerate_data;
    }

private:
    ErrorCode code_;
};

}  // namespace warpclust
