#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace asyncov {

/// Category of a library failure. The CLI serialises this as the `error`
/// field of its machine-readable stderr report.
enum class ErrorKind {
  Parse,
  Validation,
  Underpopulated,
  DegenerateSpan,
  DegenerateSpacing,
  Aliasing,
  Tolerance,
  GridTooSmall,
  Domain,
  DeconvolutionSingularity,
  DivisionByZero,
  Dimension,
  DegenerateWeight,
  ZeroVariance,
  NumericalConsistency,
  Resolution,
  Factorisation,
  Usage,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> line = std::nullopt)
      : std::runtime_error(message), kind_(kind), line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// 1-based input line for parse errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> line_;
};

}  // namespace asyncov
