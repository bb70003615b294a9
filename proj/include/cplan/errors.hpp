#pragma once

#include <stdexcept>
#include <string>

namespace cplan {

// Exit-code categories used by the command-line front end.
enum class ErrorKind { Validation = 1, Io = 2, Numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorKind::Validation, what) {}
};

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GapError : public ValidationError {
 public:
  GapError(const std::string& what, std::string hour)
      : ValidationError(what), hour_(std::move(hour)) {}
  const std::string& hour() const { return hour_; }

 private:
  std::string hour_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

// Raised by step_soc when a dispatch would push SOC outside [alpha, 1].
// overshoot is the signed distance past the violated bound, as a fraction.
class BoundsError : public NumericalError {
 public:
  BoundsError(const std::string& what, double overshoot)
      : NumericalError(what), overshoot_(overshoot) {}
  double overshoot() const { return overshoot_; }

 private:
  double overshoot_;
};

}  // namespace cplan
