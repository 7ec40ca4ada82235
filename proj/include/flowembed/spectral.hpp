#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "flowembed/complex.hpp"

namespace flowembed {

/// Orthonormal basis of ker(L1), one column per independent hole.
struct HarmonicBasis {
  Eigen::MatrixXd basis;
  /// Eigenvalues below this count as zero.
  double tolerance = 0.0;

  std::size_t betti() const noexcept { return static_cast<std::size_t>(basis.cols()); }
  std::size_t edge_count() const noexcept { return static_cast<std::size_t>(basis.rows()); }
};

struct HarmonicOptions {
  /// Defaults to 1e-8 times the largest-eigenvalue estimate.
  std::optional<double> zero_tol;
  /// Dense eigendecomposition up to this many edges, block shift-invert iteration above.
  std::size_t dense_threshold = 2000;
  /// Ritz residual target of the iterative path, relative to the largest eigenvalue.
  double convergence_tol = 1e-10;
  std::size_t max_iterations = 500;
};

/// Throws SpectralGapAmbiguity when an eigenvalue falls in [zero_tol/10, 10*zero_tol],
/// and SolverDivergence when the iterative path does not converge.
HarmonicBasis harmonic_basis(const HodgeLaplacian& l1, const HarmonicOptions& options = {});
HarmonicBasis harmonic_basis(const HodgeLaplacian& l1, double zero_tol);

/// Power-iteration estimate of the largest eigenvalue of a symmetric PSD matrix.
double largest_eigenvalue_estimate(const HodgeLaplacian& l1);

/// Canonical representative of the column space of an orthonormal basis.
///
/// The result depends only on span(basis): columns come from a pivoted
/// Gram-Schmidt of the rows (pivot = edge with the largest remaining
/// projection norm, lowest edge index on ties), and each column is flipped so
/// its largest-magnitude entry is positive. Any H*Q with Q orthogonal maps to
/// the same matrix.
Eigen::MatrixXd fix_gauge(const Eigen::MatrixXd& basis);

/// Rank over the rationals via sparse modular column reduction.
std::size_t exact_rank(const IncidenceMatrix& matrix);

/// dim ker(L1) = |E| - rank(B1) - rank(B2).
std::size_t betti_1(const SimplicialComplex& sc);

struct HodgeComponents {
  EdgeFlow gradient;
  EdgeFlow curl;
  EdgeFlow harmonic;
};

/// Splits f into im(B1^T) + im(B2) + ker(L1) by conjugate-gradient least
/// squares against B1^T and B2. The harmonic part is
/// the remainder, so reconstruction is exact up to rounding; pairwise
/// orthogonality is verified against tol * max(1, |f|^2) and a violation throws
/// SolverDivergence.
HodgeComponents hodge_decompose(const EdgeFlow& f, const SimplicialComplex& sc, double tol = 1e-8);

}  // namespace flowembed
