#ifndef AOS_ERRORS_H_
#define AOS_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aos {

// Stable error categories. The CLI maps each one to a process exit code.
enum class ErrorCode {
  kParameter,       // invalid arguments or configuration
  kFormat,          // malformed TGR1 or JSON input
  kIo,              // filesystem failures
  kEmptySelection,  // a statistic over zero valid pixels
  kDomain,          // value outside an operation's domain
  kCapability,      // backend lacks a required input
  kBackend,         // external correction backend failed
  kProjection,      // degenerate camera geometry
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorCode::kParameter, what) {}
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : Error(ErrorCode::kFormat,
              what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        detail_(what),
        byte_offset_(byte_offset) {}

  const std::string& detail() const { return detail_; }
  std::uint64_t byte_offset() const { return byte_offset_; }

 private:
  std::string detail_;
  std::uint64_t byte_offset_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

class EmptySelectionError : public Error {
 public:
  explicit EmptySelectionError(const std::string& what)
      : Error(ErrorCode::kEmptySelection, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCode::kDomain, what) {}
};

class CapabilityError : public Error {
 public:
  explicit CapabilityError(const std::string& what)
      : Error(ErrorCode::kCapability, what) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what)
      : Error(ErrorCode::kBackend, what) {}
};

class ProjectionError : public Error {
 public:
  explicit ProjectionError(const std::string& what)
      : Error(ErrorCode::kProjection, what) {}
};

}  // namespace aos

#endif  // AOS_ERRORS_H_
