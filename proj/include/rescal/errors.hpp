#pragma once

#include <stdexcept>
#include <string>

namespace rescal {

/** Stable error codes, shared with the C API. */
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  ChartMismatch = 2,
  SingularBase = 3,
  InfeasibleCover = 4,
  RangeError = 5,
  InsufficientData = 6,
  Unsupported = 7,
  ConstructorInvariant = 8,
  IoError = 9,
  Internal = 10,
  Integration = 11,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidArgumentError : Error {
  explicit InvalidArgumentError(const std::string& w) : Error(ErrorCode::InvalidArgument, w) {}
};
struct ChartMismatchError : Error {
  explicit ChartMismatchError(const std::string& w) : Error(ErrorCode::ChartMismatch, w) {}
};
struct SingularBaseError : Error {
  explicit SingularBaseError(const std::string& w) : Error(ErrorCode::SingularBase, w) {}
};
struct InfeasibleCoverError : Error {
  explicit InfeasibleCoverError(const std::string& w) : Error(ErrorCode::InfeasibleCover, w) {}
};
struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error(ErrorCode::RangeError, w) {}
};
struct InsufficientDataError : Error {
  explicit InsufficientDataError(const std::string& w) : Error(ErrorCode::InsufficientData, w) {}
};
struct UnsupportedError : Error {
  explicit UnsupportedError(const std::string& w) : Error(ErrorCode::Unsupported, w) {}
};
struct ConstructorInvariantError : Error {
  explicit ConstructorInvariantError(const std::string& w) : Error(ErrorCode::ConstructorInvariant, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::IoError, w) {}
};
struct InternalError : Error {
  explicit InternalError(const std::string& w) : Error(ErrorCode::Internal, w) {}
};
struct IntegrationError : Error {
  explicit IntegrationError(const std::string& w) : Error(ErrorCode::Integration, w) {}
};

}  // namespace rescal
