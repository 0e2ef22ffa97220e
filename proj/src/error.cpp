#include "fluxnet/error.hpp"

namespace fluxnet {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateSpecies: return "DuplicateSpecies";
    case Errc::UnknownSpecies: return "UnknownSpecies";
    case Errc::NonpositiveRate: return "NonpositiveRate";
    case Errc::NegativeInput: return "NegativeInput";
    case Errc::SelfLoop: return "SelfLoop";
    case Errc::DuplicateInput: return "DuplicateInput";
    case Errc::NoiseWithoutInput: return "NoiseWithoutInput";
    case Errc::InvalidNoise: return "InvalidNoise";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::SemanticError: return "SemanticError";
    case Errc::UnboundParameter: return "UnboundParameter";
    case Errc::SingularRateMatrix: return "SingularRateMatrix";
    case Errc::NotWeaklyReversible: return "NotWeaklyReversible";
    case Errc::UnstableMatrix: return "UnstableMatrix";
    case Errc::SolveFailure: return "SolveFailure";
    case Errc::TooLarge: return "TooLarge";
    case Errc::NearDegenerateRates: return "NearDegenerateRates";
    case Errc::MultipleNoisyInputs: return "MultipleNoisyInputs";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::NonfiniteState: return "NonfiniteState";
    case Errc::WhiteNoiseInput: return "WhiteNoiseInput";
    case Errc::InvalidSideTopology: return "InvalidSideTopology";
    case Errc::InvalidLoopTopology: return "InvalidLoopTopology";
    case Errc::UnstableAtSomeL: return "UnstableAtSomeL";
    case Errc::HypothesisViolated: return "HypothesisViolated";
  }
  return "Unknown";
}

ParseError::ParseError(Errc code, int line, int column,
                       const std::string& message)
    : Error(code, "line " + std::to_string(line) + ", col " +
                      std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      message_(message) {}

}  // namespace fluxnet
