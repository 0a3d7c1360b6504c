#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace scolab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, points outside K, bad ranges.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The requested operation has no exact implementation for this norm family.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A size cap (net cardinality, enumeration budget, vector count) would be exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Two routes that must agree did not (e.g. a closed-form minimizer lost to the solver).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Unknown keys, missing fields or bad values in a configuration document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A stochastic first-order certificate could not be driven below its tolerance.
/// `direction()` is the point of K minimizing <G, x>, i.e. the most violated direction.
class CertificateError : public Error {
 public:
  CertificateError(const std::string& what, Eigen::VectorXd direction, double violation)
      : Error(what), direction_(std::move(direction)), violation_(violation) {}

  const Eigen::VectorXd& direction() const noexcept { return direction_; }
  double violation() const noexcept { return violation_; }

 private:
  Eigen::VectorXd direction_;
  double violation_;
};

}  // namespace scolab
