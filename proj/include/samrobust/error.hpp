#pragma once

#include <stdexcept>
#include <string>

namespace samrobust {

enum class ErrorKind {
  config,           // bad user configuration, dimension mismatch between pieces
  usage,            // API misuse: shape mismatch, stale cache, empty dataset
  numeric,          // non-finite values where finite ones are required
  domain,           // mathematical precondition violated (e.g. eps_at >= eta)
  search_interval,  // scalar search could not bracket a maximum
  io,
};

const char* to_string(ErrorKind kind);

/// Base exception for everything thrown by the library. The kind decides the
/// exit code at the C boundary.
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
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::numeric, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class SearchIntervalError : public Error {
 public:
  SearchIntervalError(const std::string& what, double lo, double hi)
      : Error(ErrorKind::search_interval, what), lo_(lo), hi_(hi) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path)
      : Error(ErrorKind::io, what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace samrobust
