#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alg {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input text; carries the byte offset of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : Error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Numeric evaluation failed (division by zero, unbound variable, ...).
// Carries the printed subexpression that failed.
class EvalError : public Error {
 public:
  EvalError(const std::string& message, std::string subexpression)
      : Error(message + ": " + subexpression),
        subexpression_(std::move(subexpression)) {}

  const std::string& subexpression() const { return subexpression_; }

 private:
  std::string subexpression_;
};

// Dimension / chart mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A family of per-level objects failed a cross-level compatibility gate.
class CoherenceError : public Error {
 public:
  CoherenceError(const std::string& message, int level_low, int level_high,
                 double residual)
      : Error(message + " (levels " + std::to_string(level_low) + " -> " +
              std::to_string(level_high) + ", residual " +
              std::to_string(residual) + ")"),
        level_low_(level_low),
        level_high_(level_high),
        residual_(residual) {}

  int level_low() const { return level_low_; }
  int level_high() const { return level_high_; }
  double residual() const { return residual_; }

 private:
  int level_low_;
  int level_high_;
  double residual_;
};

}  // namespace alg
