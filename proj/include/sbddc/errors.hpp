#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sbddc {

/// Invalid user input (configuration values, mismatched sizes).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a valid result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix expected to be symmetric positive definite was not.
class SpdFailure : public NumericalError {
 public:
  SpdFailure(const std::string& what, std::vector<int> subdomains = {},
             double min_eigenvalue = 0.0)
      : NumericalError(what),
        subdomains_(std::move(subdomains)),
        min_eigenvalue_(min_eigenvalue) {}

  /// Subdomains whose local contribution was flagged as indefinite.
  const std::vector<int>& subdomains() const { return subdomains_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  std::vector<int> subdomains_;
  double min_eigenvalue_;
};

}  // namespace sbddc
