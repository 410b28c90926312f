#include "brainalign/errors.hpp"

namespace brainalign {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingInput: return "MissingInput";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::Shape: return "ShapeError";
    case ErrorKind::Dtype: return "DtypeError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::FoldDegenerate: return "FoldDegenerate";
    case ErrorKind::ScoreUndefined: return "ScoreUndefined";
    case ErrorKind::Fit: return "FitError";
    case ErrorKind::TestUndefined: return "TestUndefined";
  }
  return "Error";
}

}  // namespace brainalign
