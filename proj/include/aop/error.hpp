#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid sizes, hyperparameters or flag combinations.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Evaluation point outside the supported domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Constraint matrix A_{j+1} is (numerically) singular at `level`.
class DegenerateConstraintError : public Error {
 public:
  DegenerateConstraintError(int level, const std::string& what)
      : Error("degenerate constraint at level " + std::to_string(level) + ": " + what), level_(level) {}
  int level() const noexcept { return level_; }

 private:
  int level_;
};

/// Factorization failure or non-finite sampler state. `sweep` is -1 outside a chain.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, long sweep = -1)
      : Error(sweep >= 0 ? "sweep " + std::to_string(sweep) + ": " + what : what), sweep_(sweep) {}
  long sweep() const noexcept { return sweep_; }

 private:
  long sweep_;
};

/// Malformed input; `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what) : Error(what + ": " + path), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace aop
