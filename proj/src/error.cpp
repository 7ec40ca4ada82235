#include "flowembed/error.hpp"

namespace flowembed {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFace: return "MissingFace";
    case ErrorKind::DuplicateSimplex: return "DuplicateSimplex";
    case ErrorKind::SpectralGapAmbiguity: return "SpectralGapAmbiguity";
    case ErrorKind::SolverDivergence: return "SolverDivergence";
    case ErrorKind::NotAnEdge: return "NotAnEdge";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::DisconnectedResult: return "DisconnectedResult";
    case ErrorKind::HoleSwallowsBoundary: return "HoleSwallowsBoundary";
    case ErrorKind::HoleCountMismatch: return "HoleCountMismatch";
    case ErrorKind::Unreachable: return "Unreachable";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::AllCellsRemoved: return "AllCellsRemoved";
    case ErrorKind::PointOutsideGrid: return "PointOutsideGrid";
    case ErrorKind::NoBridgePath: return "NoBridgePath";
    case ErrorKind::DegenerateTrack: return "DegenerateTrack";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IoError:
      return 3;
    case ErrorKind::SpectralGapAmbiguity:
    case ErrorKind::SolverDivergence:
      return 4;
    default:
      return 2;
  }
}

}  // namespace flowembed
