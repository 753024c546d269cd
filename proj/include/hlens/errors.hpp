#ifndef HLENS_ERRORS_HPP
#define HLENS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hlens {

enum class Err {
  InvalidMatrix,
  ConvergenceFailure,
  NotPositiveDefinite,
  NotPSD,
  DegenerateSpectrum,
  InvalidOrder,
  ShapeError,
  NonFiniteGradient,
  InvalidTemperature,
  InsufficientData,
  NumericalOverflow,
  BlockTooLarge,
  InvalidKind,
  InsufficientBlocks,
  NoEscapeDirections,
  BoundUndefined,
  InfeasibleMean,
  InvalidGrid,
  InvalidConfig,
};

/// Library-wide exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
public:
  Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Err code() const noexcept { return code_; }

private:
  Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& msg) { throw Error(code, msg); }

} // namespace hlens

#endif
