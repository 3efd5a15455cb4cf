#ifndef HMMFDR_ERRORS_HPP
#define HMMFDR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hmmfdr {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonIrreducible : Error {
  using Error::Error;
};
struct TooFewObservations : Error {
  using Error::Error;
};
struct QuadratureFailure : Error {
  using Error::Error;
};
struct RankDeficient : Error {
  using Error::Error;
};
struct NearSingularProjection : Error {
  using Error::Error;
};
struct NotDiagonalisable : Error {
  using Error::Error;
};
struct FlatLikelihood : Error {
  using Error::Error;
};
struct AmbiguousAlignment : Error {
  using Error::Error;
};
struct DegenerateLikelihood : Error {
  using Error::Error;
};
struct IndexOutOfWindow : Error {
  using Error::Error;
};
struct NotADensity : Error {
  using Error::Error;
};
struct SingularQ : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace hmmfdr

#endif
