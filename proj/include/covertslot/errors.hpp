/**
 * Exception hierarchy shared by all modules.  Every contract violation maps
 * to a distinct type so callers and tests can match on the failure mode.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace covertslot {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AbsoluteContinuityViolation : Error { using Error::Error; };
struct AlphabetMismatch : Error { using Error::Error; };
struct OutOfRangeAlpha : Error { using Error::Error; };
struct NonPositiveVariance : Error { using Error::Error; };
struct NonPositiveArgument : Error { using Error::Error; };
struct CovertnessInfeasible : Error { using Error::Error; };
struct KeylessConditionViolated : Error { using Error::Error; };
struct RangeViolation : Error { using Error::Error; };
struct InvalidParameters : Error { using Error::Error; };
struct TooLargeToEnumerate : Error { using Error::Error; };
struct KeyMismatch : Error { using Error::Error; };
struct SlotOutOfRange : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct NonPositiveTrials : Error { using Error::Error; };
struct CostCapExceeded : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace covertslot
