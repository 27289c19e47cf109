#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pseudodice {

// Every failure raised by the library derives from Error. The CLI maps the
// category onto its process exit code.
enum class ErrorKind {
  Config,      // exit 2
  Capacity,    // exit 3
  Bounds,      // exit 3
  Format,      // exit 2
  Domain,      // exit 2
  Divergence,  // exit 4
  Validation,  // exit 2
  Io,          // exit 2
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t required)
      : Error(ErrorKind::Capacity, what), required_(required) {}
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t required_;
};

class BoundsError : public Error {
 public:
  BoundsError(const std::string& what, std::size_t required)
      : Error(ErrorKind::Bounds, what), required_(required) {}
  /// Sequence length that would have satisfied the request.
  std::size_t required() const noexcept { return required_; }

 private:
  std::size_t required_;
};

class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(ErrorKind::Format, what + " (byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  /// Byte offset in the input where parsing failed.
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : Error(ErrorKind::Divergence, what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

class IoError : public Error {
 public:
  IoError(const std::string& what, const std::string& path)
      : Error(ErrorKind::Io, what + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Process exit code for an error category.
inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Capacity:
    case ErrorKind::Bounds:
      return 3;
    case ErrorKind::Divergence:
      return 4;
    default:
      return 2;
  }
}

}  // namespace pseudodice
