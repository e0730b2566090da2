#include "corona/error.hpp"

namespace corona {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::Rejected: return "Rejected";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::CoincidentPoint: return "CoincidentPoint";
    case ErrorKind::Geometry: return "GeometryError";
    case ErrorKind::DefectiveMatrix: return "DefectiveMatrix";
    case ErrorKind::ZeroAttenuation: return "ZeroAttenuation";
    case ErrorKind::ZeroField: return "ZeroField";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

}  // namespace corona
