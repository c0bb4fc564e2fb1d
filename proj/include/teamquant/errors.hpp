#pragma once

#include <stdexcept>
#include <string>

namespace teamquant {

enum class ErrorKind {
  InvalidParameter,
  NonFiniteValue,
  Overflow,
  UnsupportedKernel,
  UnsupportedVariance,
  NonFiniteCost,
  TooLarge,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` carries the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace teamquant
