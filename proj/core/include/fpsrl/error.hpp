#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fpsrl {

/// Base class of every error raised by the library. Carries the process exit
/// code the command-line tool reports for it.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, int exit_code = 2)
      : std::runtime_error(what), exit_code_(exit_code) {}

  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// A precondition of an operation was violated (wrong dimension, bad length).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The integrator produced a non-finite state.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A learned model produced a non-finite prediction or failed to train.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A persisted file could not be parsed. `line()` is 1-based, 0 if unknown.
class LoadError : public Error {
 public:
  LoadError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace exit_code {
inline constexpr int kSuccess = 0;
inline constexpr int kUsage = 1;
inline constexpr int kDataError = 2;
inline constexpr int kThresholdFailure = 3;
}  // namespace exit_code

}  // namespace fpsrl
