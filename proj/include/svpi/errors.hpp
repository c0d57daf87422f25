#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace svpi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (x outside [0, L], H <= 0, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Loss of the fluvial regime, height cap exceeded, or non-positive height.
/// Carries the offending position and time when known.
class RegimeError : public Error {
public:
  explicit RegimeError(const std::string& what,
                       std::optional<double> x = std::nullopt,
                       std::optional<double> t = std::nullopt)
      : Error(what), x_(x), t_(t) {}

  std::optional<double> position() const { return x_; }
  std::optional<double> time() const { return t_; }

private:
  std::optional<double> x_;
  std::optional<double> t_;
};

/// Scalar boundary equation could not be solved.
class BoundarySolveError : public Error {
public:
  using Error::Error;
};

/// Time step exceeds the CFL bound.
class CflError : public Error {
public:
  using Error::Error;
};

/// Lyapunov certificate construction cannot proceed (chi blow-up, k1 = 1 with
/// a non-positive slope, empty discriminant).
class CertificateInfeasible : public Error {
public:
  using Error::Error;
};

/// Malformed configuration or scenario document.
class ParseError : public Error {
public:
  using Error::Error;
};

}  // namespace svpi
