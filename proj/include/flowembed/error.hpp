#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowembed {

enum class ErrorKind {
  // complex_core
  MissingFace,
  DuplicateSimplex,
  // spectral
  SpectralGapAmbiguity,
  SolverDivergence,
  // trajectory
  NotAnEdge,
  DimensionMismatch,
  // synthetic
  DegenerateInput,
  DisconnectedResult,
  HoleSwallowsBoundary,
  HoleCountMismatch,
  Unreachable,
  // outlier
  LengthMismatch,
  // geo
  EmptyGrid,
  AllCellsRemoved,
  PointOutsideGrid,
  NoBridgePath,
  DegenerateTrack,
  // io / cli
  ParseError,
  MissingColumn,
  IoError,
  ValidationError,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Process exit code for an error: 2 validation, 3 I/O, 4 numerical failure.
int exit_code_for(ErrorKind kind);

}  // namespace flowembed
