#pragma once

#include <stdexcept>
#include <string>

namespace brl {

/// Base class for all library errors. The CLI maps subfamilies to exit codes.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failures (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Configuration / input validation failures (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failures (CLI exit code 4).
class IoError : public Error {
 public:
  using Error::Error;
};

#define BRL_NUMERICAL_ERROR(NAME)                                   \
  class NAME : public NumericalError {                              \
   public:                                                          \
    explicit NAME(const std::string& msg) : NumericalError(#NAME ": " + msg) {} \
  }

#define BRL_CONFIG_ERROR(NAME)                                      \
  class NAME : public ConfigError {                                 \
   public:                                                          \
    explicit NAME(const std::string& msg) : ConfigError(#NAME ": " + msg) {} \
  }

// geometry
BRL_NUMERICAL_ERROR(RankDeficient);
BRL_CONFIG_ERROR(TooFewRows);
BRL_NUMERICAL_ERROR(DegenerateDraw);
BRL_NUMERICAL_ERROR(DegenerateTangent);
BRL_NUMERICAL_ERROR(LinearlyDependent);

// estimators
BRL_NUMERICAL_ERROR(NoBracket);
BRL_NUMERICAL_ERROR(NoConvergence);
BRL_NUMERICAL_ERROR(ZeroScale);
BRL_NUMERICAL_ERROR(SingularImplicitSystem);

// sampler
BRL_NUMERICAL_ERROR(PostConditionViolated);
BRL_NUMERICAL_ERROR(DegenerateProjection);
BRL_NUMERICAL_ERROR(NearTangentDegeneracy);
BRL_NUMERICAL_ERROR(NumericalPD);
BRL_CONFIG_ERROR(ImproperPosterior);
BRL_NUMERICAL_ERROR(ChainStalled);

// evaluation
BRL_CONFIG_ERROR(TooFewDraws);
BRL_NUMERICAL_ERROR(QuadratureFailure);
BRL_CONFIG_ERROR(EmptyAfterTrim);
BRL_CONFIG_ERROR(StratumTooSmall);

// io
BRL_CONFIG_ERROR(ParseError);
BRL_CONFIG_ERROR(MissingColumn);
BRL_CONFIG_ERROR(NonFiniteValue);

#undef BRL_NUMERICAL_ERROR
#undef BRL_CONFIG_ERROR

}  // namespace brl
