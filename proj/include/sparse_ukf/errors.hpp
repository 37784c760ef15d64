#pragma once

#include <stdexcept>
#include <string>

namespace sparse_ukf {

/// Base of every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPARSE_UKF_DEFINE_ERROR(Name)            \
  class Name : public Error {                    \
   public:                                       \
    using Error::Error;                          \
  }

SPARSE_UKF_DEFINE_ERROR(NotPositiveDefinite);
SPARSE_UKF_DEFINE_ERROR(RankDeficient);
SPARSE_UKF_DEFINE_ERROR(DowndateFailure);
SPARSE_UKF_DEFINE_ERROR(SingularFactor);
SPARSE_UKF_DEFINE_ERROR(DimensionMismatch);
SPARSE_UKF_DEFINE_ERROR(NonFiniteResult);
SPARSE_UKF_DEFINE_ERROR(InvalidParams);
SPARSE_UKF_DEFINE_ERROR(ConfigError);
SPARSE_UKF_DEFINE_ERROR(EmptyWindow);
SPARSE_UKF_DEFINE_ERROR(IoError);

#undef SPARSE_UKF_DEFINE_ERROR

}  // namespace sparse_ukf
