#include "cmcopula/error.hpp"

namespace cmcopula {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::singularity: return "singularity";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::quadrature: return "quadrature";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::degenerate_sample: return "degenerate_sample";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace cmcopula
