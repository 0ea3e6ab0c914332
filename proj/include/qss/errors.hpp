#pragma once

#include <stdexcept>
#include <string>

namespace qss {

// Covariance matrix failed the positivity / uncertainty-principle check.
class PhysicalityError : public std::runtime_error {
 public:
  explicit PhysicalityError(const std::string& what) : std::runtime_error(what) {}
};

// Scenario/config file rejected; carries a line number when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Monte Carlo estimate disagreed with the analytic engine beyond the band.
class McMismatchError : public std::runtime_error {
 public:
  explicit McMismatchError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qss
