#pragma once

#include <stdexcept>
#include <string>

namespace styleaug {

// Bad input data or a broken pipeline invariant (malformed TSV row, quota
// larger than the eligible pool, stale upstream digest). Maps to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem or environment failure. Maps to exit code 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Missing or inconsistent configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace styleaug
