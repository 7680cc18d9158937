#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace memroute {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller bug: a precondition on arguments was violated.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A pipeline, index or provider that an operation needs is not configured.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a documented invariant (benchmark files, run files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A text resource failed to parse. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Filesystem failure: unreadable or unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A persisted store failed validation (checksum, truncation, version).
class CorruptStoreError : public Error {
 public:
  using Error::Error;
};

/// Store vectors and provider vectors disagree on dimension.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The file-backed provider has no vector for a requested digest.
class MissingEmbeddingError : public Error {
 public:
  using Error::Error;
};

}  // namespace memroute
