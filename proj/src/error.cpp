#include "warpclust/error.hpp"

namespace warpclust {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::invalid_knots: return "invalid-knots";
        case ErrorCode::singular_fit: return "singular-fit";
        case ErrorCode::unsupported_degree: return "unsupported-degree";
        case ErrorCode::invalid_parameter: return "invalid-parameter";
        case ErrorCode::monotonicity_violation: return "monotonicity-violation";
        case ErrorCode::degenerate_curve: return "degenerate-curve";
        case ErrorCode::range_error: return "range-error";
        case ErrorCode::zero_variance: return "zero-variance";
        case ErrorCode::missing_similarities: return "missing-similarities";
        case ErrorCode::degenerate_seminorm: return "degenerate-seminorm";
        case ErrorCode::internal_consistency: return "internal-consistency";
        case ErrorCode::undefined_index: return "undefined-index";
        case ErrorCode::element_mismatch: return "element-mismatch";
        case ErrorCode::configuration: return "configuration";
        case ErrorCode::degenerate_data: return "degenerate-data";
        case ErrorCode::invalid_input: return "invalid-input";
    }
    return "unknown";
}

}  // namespace warpclust
