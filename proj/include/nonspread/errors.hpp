#pragma once

#include <stdexcept>
#include <string>

namespace nonspread {

// Common base so callers can catch everything from this library in one clause.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NONSPREAD_DEFINE_ERROR(Name)      \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

NONSPREAD_DEFINE_ERROR(InvalidGrid)
NONSPREAD_DEFINE_ERROR(InvalidSpec)        // construction-time invariant violations
NONSPREAD_DEFINE_ERROR(GridMismatch)
NONSPREAD_DEFINE_ERROR(DomainOverflow)
NONSPREAD_DEFINE_ERROR(IndexTooLarge)
NONSPREAD_DEFINE_ERROR(TimeOutOfRange)
NONSPREAD_DEFINE_ERROR(ComplexPotential)
NONSPREAD_DEFINE_ERROR(NotConfining)
NONSPREAD_DEFINE_ERROR(ConvergenceFailure)
NONSPREAD_DEFINE_ERROR(UnsupportedPotential)
NONSPREAD_DEFINE_ERROR(SupportEscape)
NONSPREAD_DEFINE_ERROR(SolverBreakdown)
NONSPREAD_DEFINE_ERROR(DirichletViolation)
NONSPREAD_DEFINE_ERROR(InsufficientSupport)
NONSPREAD_DEFINE_ERROR(InsufficientSnapshots)
NONSPREAD_DEFINE_ERROR(InvalidConfig)      // CLI/scenario schema errors
NONSPREAD_DEFINE_ERROR(WriteFailure)       // output files could not be produced

#undef NONSPREAD_DEFINE_ERROR

}  // namespace nonspread
