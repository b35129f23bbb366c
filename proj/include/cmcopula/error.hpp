#pragma once

#include <stdexcept>
#include <string>

namespace cmcopula {

enum class ErrorCode {
  domain,             // argument outside its admissible set
  singularity,        // closed-form inversion hit a vanishing denominator
  out_of_range,       // target not in the image of the model map
  quadrature,         // tolerance not met within the evaluation budget
  convergence,        // iterative solver gave up without a usable iterate
  degenerate_sample,  // statistic undefined for the given sample
  parse,              // malformed input table or configuration
  io,
};

const char* to_string(ErrorCode code);

/// Base for every error raised by the library. Callers that only need the
/// category can switch on code() instead of catching subclasses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::domain, what) {}
};

class SingularityError : public Error {
 public:
  explicit SingularityError(const std::string& what)
      : Error(ErrorCode::singularity, what) {}
};

class OutOfRangeError : public Error {
 public:
  explicit OutOfRangeError(const std::string& what)
      : Error(ErrorCode::out_of_range, what) {}
};

class QuadratureError : public Error {
 public:
  explicit QuadratureError(const std::string& what)
      : Error(ErrorCode::quadrature, what) {}
};

class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what)
      : Error(ErrorCode::convergence, what) {}
};

class DegenerateSampleError : public Error {
 public:
  explicit DegenerateSampleError(const std::string& what)
      : Error(ErrorCode::degenerate_sample, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(ErrorCode::parse, what), line_(line) {}
  /// 1-based line of the offending input, or -1 when not line-oriented.
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::io, what) {}
};

}  // namespace cmcopula
