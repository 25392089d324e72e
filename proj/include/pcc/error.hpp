#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pcc {

enum class ErrorCode {
    NonSquare,
    NonZeroDiagonal,
    NonFiniteEntry,
    DimensionMismatch,
    EmptyInput,
    NegativeEntryWithWeighting,
    PointNotInCluster,
    EmptyCluster,
    TooFewPoints,
    NoCentroids,
    DuplicateCentroid,
    BadK,
    BadKCheck,
    MatchPointDropped,
    InconsistentSets,
    InfeasibleBounds,
    CombinatorialBlowup,
    BadFraction,
    SingleCluster,
    ParseError,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. Every failure path carries one of the ErrorCode values so callers
/// (the CLI in particular) can map it to an exit status without string matching.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace pcc
