#pragma once

#include <stdexcept>
#include <string>

namespace sashpcfe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A distribution or model parameter lies outside its admissible domain.
class ParameterDomainError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside the support of the map being applied.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Requested Sobol dimension exceeds the shipped direction-number table.
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (non-finite values, factorization failure,
/// singular system).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid study configuration or malformed input document.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sashpcfe
