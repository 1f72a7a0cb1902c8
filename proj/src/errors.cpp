#include "fruitsynth/errors.hpp"

namespace fruitsynth {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::EmptyMask: return "EmptyMask";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SceneTooSmall: return "SceneTooSmall";
    case Errc::SourceTooSmall: return "SourceTooSmall";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
    case Errc::NoGroundTruth: return "NoGroundTruth";
    case Errc::MissingMask: return "MissingMask";
    case Errc::NoPixelRef: return "NoPixelRef";
    case Errc::DegenerateCloud: return "DegenerateCloud";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::EmptyCloud: return "EmptyCloud";
    case Errc::NoDetections: return "NoDetections";
    case Errc::NoCandidates: return "NoCandidates";
    case Errc::EmptyGroundTruth: return "EmptyGroundTruth";
    case Errc::ZeroAttempts: return "ZeroAttempts";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace fruitsynth
