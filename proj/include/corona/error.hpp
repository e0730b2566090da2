#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace corona {

enum class ErrorKind {
  UnboundVariable,
  NonFinite,
  Degenerate,
  Rejected,
  Domain,
  CoincidentPoint,
  Geometry,
  DefectiveMatrix,
  ZeroAttenuation,
  ZeroField,
  EmptyDataset,
  InvalidInput,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace corona
