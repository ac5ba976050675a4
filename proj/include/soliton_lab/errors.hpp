#pragma once

#include <stdexcept>
#include <string>

namespace soliton_lab {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 3 (numeric error) unless a more specific mapping applies.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SOLITON_LAB_ERROR(Name)             \
  class Name : public Error {               \
   public:                                  \
    explicit Name(const std::string& what)  \
        : Error(#Name ": " + what) {}       \
  }

// chart_tensor
SOLITON_LAB_ERROR(SingularMetric);
SOLITON_LAB_ERROR(DegenerateConformalFactor);
SOLITON_LAB_ERROR(DimensionMismatch);
// soliton_core
SOLITON_LAB_ERROR(DimensionTooSmall);
SOLITON_LAB_ERROR(NotASoliton);
SOLITON_LAB_ERROR(ZeroCrossing);
SOLITON_LAB_ERROR(EmptySample);
SOLITON_LAB_ERROR(DomainError);
// skrp_family
SOLITON_LAB_ERROR(PoleError);
SOLITON_LAB_ERROR(IntegrationFailure);
SOLITON_LAB_ERROR(DomainSplit);
SOLITON_LAB_ERROR(CalibrationFailure);
// completeness
SOLITON_LAB_ERROR(NonpositiveQ);
SOLITON_LAB_ERROR(OscillationDetected);
SOLITON_LAB_ERROR(DomainExit);
// cli
SOLITON_LAB_ERROR(UnknownFixture);
SOLITON_LAB_ERROR(ConfigError);

#undef SOLITON_LAB_ERROR

}  // namespace soliton_lab
