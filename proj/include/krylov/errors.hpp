#pragma once

#include <stdexcept>
#include <string>

namespace krylov {

class KrylovError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define KRYLOV_DEFINE_ERROR(Name)                                   \
  class Name : public KrylovError {                                 \
  public:                                                           \
    explicit Name(const std::string& what) : KrylovError(what) {}   \
  };

// core
KRYLOV_DEFINE_ERROR(FunctionDomainError)
KRYLOV_DEFINE_ERROR(SingularSystem)
KRYLOV_DEFINE_ERROR(DimensionMismatch)

// krylov
KRYLOV_DEFINE_ERROR(ZeroStartVector)
KRYLOV_DEFINE_ERROR(ZeroStartBlock)

// orthopoly
KRYLOV_DEFINE_ERROR(NonFiniteSample)
KRYLOV_DEFINE_ERROR(InsufficientSupport)
KRYLOV_DEFINE_ERROR(MassMismatch)
KRYLOV_DEFINE_ERROR(InvalidMeasure)

// solvers
KRYLOV_DEFINE_ERROR(InvalidInterval)
KRYLOV_DEFINE_ERROR(InsufficientIterates)

// trace_spectrum
KRYLOV_DEFINE_ERROR(SpectrumOutsideInterval)

// cli
KRYLOV_DEFINE_ERROR(InvalidSpec)
KRYLOV_DEFINE_ERROR(ParseError)
KRYLOV_DEFINE_ERROR(NotSymmetric)
KRYLOV_DEFINE_ERROR(DimensionTooLarge)
KRYLOV_DEFINE_ERROR(ConfigError)

#undef KRYLOV_DEFINE_ERROR

}  // namespace krylov
