#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace commsense {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but carries no usable information (e.g. all samples equal).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the support the operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

/// Least-squares system whose matrix fails the rank test.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// An iterative solver failed to converge. Carries the iterate history.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}

  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// Pipeline ran but produced nothing (zero accepted bursts).
class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedVersion : public Error {
 public:
  using Error::Error;
};

}  // namespace commsense
