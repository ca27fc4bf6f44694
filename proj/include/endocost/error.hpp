#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace endocost {

enum class ErrorKind {
  InvalidSize,
  InvalidWeight,
  InvalidArgument,
  ConstructionFailed,
  DimensionMismatch,
  OutOfRange,
  NonFinite,
  NotOnSimplex,
  SolverFailure,
  IncompleteTrace,
  NonPositiveTotal,
  Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when projected gradient ascent exhausts its iteration budget.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, Eigen::VectorXd last_iterate, double gradient_norm)
      : Error(ErrorKind::SolverFailure, what),
        last_iterate_(std::move(last_iterate)),
        gradient_norm_(gradient_norm) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  Eigen::VectorXd last_iterate_;
  double gradient_norm_;
};

// Configuration problems carry the dotted path of the offending field.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(ErrorKind::Config, field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace endocost
