#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brainalign {

enum class ErrorKind {
  MissingInput,
  Format,
  Shape,
  Dtype,
  Validation,
  DegenerateInput,
  FoldDegenerate,
  ScoreUndefined,
  Fit,
  TestUndefined,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define BRAINALIGN_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
  };

BRAINALIGN_DEFINE_ERROR(MissingInputError, MissingInput)
BRAINALIGN_DEFINE_ERROR(FormatError, Format)
BRAINALIGN_DEFINE_ERROR(ShapeError, Shape)
BRAINALIGN_DEFINE_ERROR(DtypeError, Dtype)
BRAINALIGN_DEFINE_ERROR(ValidationError, Validation)
BRAINALIGN_DEFINE_ERROR(DegenerateInput, DegenerateInput)
BRAINALIGN_DEFINE_ERROR(FoldDegenerate, FoldDegenerate)
BRAINALIGN_DEFINE_ERROR(ScoreUndefined, ScoreUndefined)
BRAINALIGN_DEFINE_ERROR(FitError, Fit)
BRAINALIGN_DEFINE_ERROR(TestUndefined, TestUndefined)

#undef BRAINALIGN_DEFINE_ERROR

}  // namespace brainalign
