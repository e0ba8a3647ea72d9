#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace varinf {

// Base for all library errors. `code()` is a stable machine-readable tag
// (e.g. "DRectOffGrid", "KTooSmall") used by the CLI to name the failing
// invariant in reports.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

// Raised when a modular/energy term exceeds the exp(700) representability
// cap. Carries the offending quadrature point.
class ModularOverflow : public Error {
public:
  ModularOverflow(double x, double y, double exponent, double magnitude)
      : Error("ModularOverflow",
              "term |" + std::to_string(magnitude) + "|^" +
                  std::to_string(exponent) + " overflows at (" +
                  std::to_string(x) + ", " + std::to_string(y) + ")"),
        x(x), y(y), exponent(exponent), magnitude(magnitude) {}

  double x, y, exponent, magnitude;
};

class ParseError : public Error {
public:
  ParseError(int line, int column, const std::string& msg)
      : Error("ParseError",
              "line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ": " + msg),
        line(line), column(column) {}

  int line, column;
};

// A config invariant failed; `invariant` names it (PMinusTooSmall,
// DRectTouchesBoundary, compatibility, ...).
class ValidationError : public Error {
public:
  ValidationError(std::string invariant, const std::string& msg)
      : Error("ValidationError", invariant + ": " + msg),
        invariant(std::move(invariant)) {}

  std::string invariant;
};

}  // namespace varinf
