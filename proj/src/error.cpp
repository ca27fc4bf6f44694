#include "endocost/error.hpp"

namespace endocost {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSize: return "invalid-size";
    case ErrorKind::InvalidWeight: return "invalid-weight";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ConstructionFailed: return "construction-failed";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::NotOnSimplex: return "not-on-simplex";
    case ErrorKind::SolverFailure: return "solver-failure";
    case ErrorKind::IncompleteTrace: return "incomplete-trace";
    case ErrorKind::NonPositiveTotal: return "non-positive-total";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

}  // namespace endocost
