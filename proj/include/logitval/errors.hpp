#pragma once

#include <stdexcept>
#include <string>

namespace logitval {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LOGITVAL_DEFINE_ERROR(NAME)      \
  class NAME : public Error {            \
   public:                               \
    using Error::Error;                  \
  }

// model fitting
LOGITVAL_DEFINE_ERROR(CollinearDesign);
LOGITVAL_DEFINE_ERROR(SingleClassOutcome);
LOGITVAL_DEFINE_ERROR(SingularInformation);
LOGITVAL_DEFINE_ERROR(SingularPenalizedHessian);
LOGITVAL_DEFINE_ERROR(DimensionMismatch);
LOGITVAL_DEFINE_ERROR(InvalidSpec);

// metrics
LOGITVAL_DEFINE_ERROR(DegenerateOutcome);

// resampling
LOGITVAL_DEFINE_ERROR(BrierNotSupported);
LOGITVAL_DEFINE_ERROR(AllSubsetsDiscarded);

// simulation study
LOGITVAL_DEFINE_ERROR(InsufficientReplicates);

// data loading / reporting
LOGITVAL_DEFINE_ERROR(InvalidDataset);
LOGITVAL_DEFINE_ERROR(MissingColumn);
LOGITVAL_DEFINE_ERROR(NonBinaryOutcome);
LOGITVAL_DEFINE_ERROR(NonNumericCovariate);
LOGITVAL_DEFINE_ERROR(IoError);
LOGITVAL_DEFINE_ERROR(ConfigError);

#undef LOGITVAL_DEFINE_ERROR

}  // namespace logitval
