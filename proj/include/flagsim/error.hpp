#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace flagsim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file or configuration could not be parsed or failed validation.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, int line, const std::string& message)
      : Error(message), field_(std::move(field)), line_(line) {}
  const std::string& field() const { return field_; }
  int line() const { return line_; }  // 0 when not tied to a file line

 private:
  std::string field_;
  int line_;
};

/// An edge collapsed below the resolvable length, or an orientation that
/// the force model cannot handle.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Newton iteration failed even after repeated step halving.
class SolverError : public Error {
 public:
  SolverError(double time, Eigen::VectorXd q, const std::string& message)
      : Error(message), time_(time), q_(std::move(q)) {}
  double time() const { return time_; }
  const Eigen::VectorXd& dump() const { return q_; }

 private:
  double time_;
  Eigen::VectorXd q_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class SteadyStateError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

}  // namespace flagsim
