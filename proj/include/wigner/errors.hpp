#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wigner {

/// Malformed scenario or command-line configuration. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  ConfigError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  /// 1-based line of the offending entry, 0 when not tied to a file line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

/// Conditioning failure, blow-up or other numerical breakdown. Maps to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wigner
