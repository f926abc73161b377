#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace csi {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-parsable tag used by the CLI when reporting failures.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("invalid-argument", what) {}
};

/// Malformed input bytes. `offset` is the byte position where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error("parse-error", what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A probability distribution could not be normalized (no mass where mass is required).
class DegenerateDistribution : public Error {
 public:
  explicit DegenerateDistribution(const std::string& what)
      : Error("degenerate-distribution", what) {}
};

/// Singles rates that no complex amplitude can produce.
class InconsistentRates : public Error {
 public:
  explicit InconsistentRates(const std::string& what) : Error("inconsistent-rates", what) {}
};

class ResourceLimit : public Error {
 public:
  explicit ResourceLimit(const std::string& what) : Error("resource-limit", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io-error", what) {}
};

}  // namespace csi
