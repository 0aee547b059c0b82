#include "asyncov/error.hpp"

namespace asyncov {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse_error";
    case ErrorKind::Validation: return "validation_error";
    case ErrorKind::Underpopulated: return "underpopulated_series";
    case ErrorKind::DegenerateSpan: return "degenerate_span";
    case ErrorKind::DegenerateSpacing: return "degenerate_spacing";
    case ErrorKind::Aliasing: return "aliasing_error";
    case ErrorKind::Tolerance: return "tolerance_error";
    case ErrorKind::GridTooSmall: return "grid_too_small";
    case ErrorKind::Domain: return "domain_error";
    case ErrorKind::DeconvolutionSingularity: return "deconvolution_singularity";
    case ErrorKind::DivisionByZero: return "division_by_zero";
    case ErrorKind::Dimension: return "dimension_error";
    case ErrorKind::DegenerateWeight: return "degenerate_weight";
    case ErrorKind::ZeroVariance: return "zero_variance";
    case ErrorKind::NumericalConsistency: return "numerical_consistency";
    case ErrorKind::Resolution: return "resolution_error";
    case ErrorKind::Factorisation: return "factorisation_error";
    case ErrorKind::Usage: return "usage_error";
    case ErrorKind::Io: return "io_error";
  }
  return "error";
}

}  // namespace asyncov
