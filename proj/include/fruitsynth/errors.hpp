#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fruitsynth {

enum class Errc {
  EmptyMask,
  DimensionMismatch,
  InvalidArgument,
  SceneTooSmall,
  SourceTooSmall,
  DuplicateId,
  IoError,
  ParseError,
  NoGroundTruth,
  MissingMask,
  NoPixelRef,
  DegenerateCloud,
  TooFewPoints,
  EmptyCloud,
  NoDetections,
  NoCandidates,
  EmptyGroundTruth,
  ZeroAttempts,
};

std::string_view errc_name(Errc code);

/// Every failure raised by the toolkit carries one of the Errc codes so that
/// callers (and the CLI) can branch on the kind without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace fruitsynth
