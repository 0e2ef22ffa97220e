#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fluxnet {

enum class Errc {
  DuplicateSpecies,
  UnknownSpecies,
  NonpositiveRate,
  NegativeInput,
  SelfLoop,
  DuplicateInput,
  NoiseWithoutInput,
  InvalidNoise,
  SyntaxError,
  SemanticError,
  UnboundParameter,
  SingularRateMatrix,
  NotWeaklyReversible,
  UnstableMatrix,
  SolveFailure,
  TooLarge,
  NearDegenerateRates,
  MultipleNoisyInputs,
  InvalidArgument,
  InvalidConfig,
  NonfiniteState,
  WhiteNoiseInput,
  InvalidSideTopology,
  InvalidLoopTopology,
  UnstableAtSomeL,
  HypothesisViolated,
};

std::string_view errc_name(Errc code) noexcept;

/// Library-wide exception. Every failure a caller can act on carries one of
/// the codes above so the CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Parse failure with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(Errc code, int line, int column, const std::string& message);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  int line_;
  int column_;
  std::string message_;
};

}  // namespace fluxnet
