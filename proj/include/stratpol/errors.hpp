#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace stratpol {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An invalid run configuration. Carries the offending field name.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// An environment function was evaluated outside its domain
/// (e.g. the pricing report formula at its singularity).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A linear system in an estimator or risk-minimization fit was singular.
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// The full-information grid search ended on the edge of its window.
class SearchError : public Error {
 public:
  using Error::Error;
};

namespace detail {

// Rethrows the in-flight library error with a context prefix, keeping its type.
[[noreturn]] inline void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const DomainError& e) {
    throw DomainError(context + ": " + e.what());
  } catch (const EstimationError& e) {
    throw EstimationError(context + ": " + e.what());
  } catch (const SearchError& e) {
    throw SearchError(context + ": " + e.what());
  }
}

}  // namespace detail
}  // namespace stratpol
