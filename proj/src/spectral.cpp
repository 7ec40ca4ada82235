#include "flowembed/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "flowembed/error.hpp"
#include "flowembed/rng.hpp"

namespace flowembed {

namespace {

void check_gap(const Eigen::VectorXd& eigenvalues, double zero_tol) {
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double lambda = eigenvalues[i];
    if (lambda >= zero_tol / 10.0 && lambda <= zero_tol * 10.0) {
      throw Error(ErrorKind::SpectralGapAmbiguity,
                  "eigenvalue " + std::to_string(lambda) + " is within a decade of zero_tol " +
                      std::to_string(zero_tol));
    }
  }
}

Eigen::MatrixXd kernel_dense(const HodgeLaplacian& l1, double zero_tol) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(l1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverDivergence, "dense symmetric eigensolver failed");
  }
  check_gap(eig.eigenvalues(), zero_tol);
  Eigen::Index count = 0;
  while (count < eig.eigenvalues().size() && eig.eigenvalues()[count] < zero_tol) ++count;
  return eig.eigenvectors().leftCols(count);
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

// Block subspace iteration on (L1 + shift I)^{-1} with Rayleigh-Ritz. The
// kernel is amplified by 1/shift against 1/(lambda + shift) for the rest of
// the spectrum, so a handful of sweeps suffice when shift << spectral gap.
Eigen::MatrixXd kernel_iterative(const HodgeLaplacian& l1, double zero_tol, double lambda_max,
                                 const HarmonicOptions& options) {
  const Eigen::Index n = l1.rows();
  const double shift = zero_tol;
  HodgeLaplacian shifted = l1;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
  shifted.makeCompressed();
  Eigen::SimplicialLDLT<HodgeLaplacian> factor(shifted);
  if (factor.info() != Eigen::Success) {
    throw Error(ErrorKind::SolverDivergence, "sparse LDLT factorization of shifted L1 failed");
  }

  const double residual_tol = options.convergence_tol * std::max(lambda_max, 1.0);
  Eigen::Index block = std::min<Eigen::Index>(n, 8);
  Rng rng(0x5EEDF10Eull);

  while (true) {
    Eigen::MatrixXd x(n, block);
    for (Eigen::Index j = 0; j < block; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) x(i, j) = rng.uniform(-1.0, 1.0);
    }
    x = orthonormal_columns(x);

    Eigen::VectorXd theta;
    Eigen::Index zero_count = 0;
    bool converged = false;
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
      x = orthonormal_columns(factor.solve(x));
      Eigen::MatrixXd lx = l1 * x;
      Eigen::MatrixXd projected = x.transpose() * lx;
      projected = 0.5 * (projected + projected.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(projected);
      theta = ritz.eigenvalues();
      x = x * ritz.eigenvectors();
      lx = lx * ritz.eigenvectors();

      zero_count = 0;
      while (zero_count < block && theta[zero_count] < zero_tol) ++zero_count;
      const Eigen::Index needed = std::min(block, zero_count + 1);
      converged = true;
      for (Eigen::Index j = 0; j < needed; ++j) {
        if ((lx.col(j) - theta[j] * x.col(j)).norm() > residual_tol) {
          converged = false;
          break;
        }
      }
      if (converged) break;
    }
    if (!converged) {
      throw Error(ErrorKind::SolverDivergence,
                  "block shift-invert iteration did not converge in " +
                      std::to_string(options.max_iterations) + " sweeps");
    }
    if (zero_count >= block - 1 && block < n) {
      // The kernel may not fit in the block; retry wider.
      block = std::min<Eigen::Index>(n, 2 * block);
      continue;
    }
    const Eigen::Index checked = std::min(block, zero_count + 1);
    check_gap(theta.head(checked), zero_tol);
    return orthonormal_columns(x.leftCols(zero_count));
  }
}

// Sparse column vector over Z/p.
using ModColumn = std::vector<std::pair<std::uint32_t, std::uint64_t>>;

std::uint64_t mod_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t p) {
  std::uint64_t result = 1;
  base %= p;
  while (exp) {
    if (exp & 1) result = result * base % p;
    base = base * base % p;
    exp >>= 1;
  }
  return result;
}

std::size_t rank_mod_p(const IncidenceMatrix& matrix, std::uint64_t p) {
  const auto rows = static_cast<std::size_t>(matrix.rows());
  // owner[r] = reduced column whose lowest nonzero is row r.
  std::vector<ModColumn> owner(rows);
  std::vector<bool> owned(rows, false);
  std::size_t rank = 0;
  ModColumn col;
  ModColumn merged;
  for (Eigen::Index j = 0; j < matrix.outerSize(); ++j) {
    col.clear();
    for (IncidenceMatrix::InnerIterator it(matrix, j); it; ++it) {
      const long long v = it.value();
      if (v == 0) continue;
      const auto residue = static_cast<std::uint64_t>(((v % static_cast<long long>(p)) +
                                                       static_cast<long long>(p)) %
                                                      static_cast<long long>(p));
      col.emplace_back(static_cast<std::uint32_t>(it.index()), residue);
    }
    std::sort(col.begin(), col.end());
    while (!col.empty()) {
      const std::uint32_t low = col.back().first;
      if (!owned[low]) break;
      const ModColumn& pivot = owner[low];
      // col -= factor * pivot, with factor = col[low] / pivot[low].
      const std::uint64_t factor = col.back().second * mod_pow(pivot.back().second, p - 2, p) % p;
      merged.clear();
      std::size_t a = 0;
      std::size_t b = 0;
      while (a < col.size() || b < pivot.size()) {
        if (b == pivot.size() || (a < col.size() && col[a].first < pivot[b].first)) {
          merged.push_back(col[a++]);
        } else if (a == col.size() || pivot[b].first < col[a].first) {
          merged.emplace_back(pivot[b].first, (p - factor * pivot[b].second % p) % p);
          ++b;
        } else {
          const std::uint64_t value = (col[a].second + p - factor * pivot[b].second % p) % p;
          if (value != 0) merged.emplace_back(col[a].first, value);
          ++a;
          ++b;
        }
      }
      col.swap(merged);
    }
    if (!col.empty()) {
      const std::uint32_t low = col.back().first;
      owned[low] = true;
      owner[low] = col;
      ++rank;
    }
  }
  return rank;
}

}  // namespace

double largest_eigenvalue_estimate(const HodgeLaplacian& l1) {
  const Eigen::Index n = l1.rows();
  if (n == 0) return 0.0;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  v.normalize();
  double estimate = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd w = l1 * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (iter > 10 && std::abs(next - estimate) <= 1e-6 * std::abs(next)) return next;
    estimate = next;
  }
  return estimate;
}

Eigen::MatrixXd fix_gauge(const Eigen::MatrixXd& basis) {
  const Eigen::Index rows = basis.rows();
  const Eigen::Index dim = basis.cols();
  if (dim == 0) return basis;
  constexpr double kTie = 1e-9;

  Eigen::MatrixXd residual = basis;  // rows deflated in coefficient space
  Eigen::MatrixXd rotation(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const Eigen::VectorXd norms = residual.rowwise().norm();
    const double best = norms.maxCoeff();
    Eigen::Index pivot = 0;
    while (norms[pivot] < best * (1.0 - kTie)) ++pivot;
    Eigen::VectorXd direction = residual.row(pivot).transpose() / norms[pivot];
    rotation.col(k) = direction;
    residual -= (residual * direction) * direction.transpose();
  }
  // Re-orthonormalize the rotation against rounding drift.
  Eigen::MatrixXd fixed = basis * orthonormal_columns(rotation);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto& col = fixed.col(k);
    const double peak = col.cwiseAbs().maxCoeff();
    Eigen::Index at = 0;
    while (at < rows && std::abs(col[at]) < peak * (1.0 - kTie)) ++at;
    // HouseholderQR may flip signs, so the sign rule is applied last.
    if (col[at] < 0.0) fixed.col(k) = -fixed.col(k);
  }
  return fixed;
}

HarmonicBasis harmonic_basis(const HodgeLaplacian& l1, const HarmonicOptions& options) {
  if (l1.rows() != l1.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "L1 must be square");
  }
  const double lambda_max = largest_eigenvalue_estimate(l1);
  const double zero_tol = options.zero_tol.value_or(lambda_max > 0.0 ? 1e-8 * lambda_max : 1e-8);
  if (!(zero_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "zero_tol must be positive");

  HarmonicBasis result;
  result.tolerance = zero_tol;
  const auto n = static_cast<std::size_t>(l1.rows());
  if (n == 0) {
    result.basis.resize(0, 0);
    return result;
  }
  Eigen::MatrixXd kernel = n <= options.dense_threshold
                               ? kernel_dense(l1, zero_tol)
                               : kernel_iterative(l1, zero_tol, lambda_max, options);
  result.basis = fix_gauge(kernel);
  return result;
}

HarmonicBasis harmonic_basis(const HodgeLaplacian& l1, double zero_tol) {
  HarmonicOptions options;
  options.zero_tol = zero_tol;
  return harmonic_basis(l1, options);
}

std::size_t exact_rank(const IncidenceMatrix& matrix) {
  // Rank mod p never exceeds the rational rank; two large primes make a
  // deficit astronomically unlikely for small-entry matrices.
  IncidenceMatrix compressed = matrix;
  compressed.makeCompressed();
  return std::max(rank_mod_p(compressed, 2147483647ULL), rank_mod_p(compressed, 1000000007ULL));
}

std::size_t betti_1(const SimplicialComplex& sc) {
  return sc.edge_count() - exact_rank(boundary_1(sc)) - exact_rank(boundary_2(sc));
}

namespace {

// CGLS for min |M y - f|; returns the projection M y of f onto im(M). Iterates
// stay in the row space of M, so a rank-deficient M causes no drift.
Eigen::VectorXd project_onto_image(const Eigen::SparseMatrix<double>& m, const Eigen::VectorXd& f,
                                   double rel_tol, std::size_t max_iter, const char* what) {
  Eigen::VectorXd image = Eigen::VectorXd::Zero(f.size());
  if (m.cols() == 0) return image;
  Eigen::VectorXd r = f;
  Eigen::VectorXd s = m.transpose() * r;
  // |M| <= sqrt(max row sum * max column sum) of |M|
  Eigen::VectorXd row_sum = Eigen::VectorXd::Zero(m.rows());
  double col_max = 0.0;
  for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
    double col = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, c); it; ++it) {
      col += std::abs(it.value());
      row_sum[it.row()] += std::abs(it.value());
    }
    col_max = std::max(col_max, col);
  }
  const double stop = rel_tol * std::sqrt(col_max * row_sum.maxCoeff()) * f.norm();
  if (s.norm() <= stop) return image;
  Eigen::VectorXd p = s;
  double gamma = s.squaredNorm();
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    const Eigen::VectorXd q = m * p;
    const double qq = q.squaredNorm();
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    image += alpha * q;
    r -= alpha * q;
    s = m.transpose() * r;
    const double gamma_next = s.squaredNorm();
    if (std::sqrt(gamma_next) <= stop) return image;
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  throw Error(ErrorKind::SolverDivergence,
              std::string(what) + " least-squares solve did not reach tolerance in " +
                  std::to_string(max_iter) + " iterations");
}

}  // namespace

HodgeComponents hodge_decompose(const EdgeFlow& f, const SimplicialComplex& sc, double tol) {
  const auto e = static_cast<Eigen::Index>(sc.edge_count());
  if (f.size() != e) {
    throw Error(ErrorKind::DimensionMismatch, "flow has " + std::to_string(f.size()) +
                                                  " entries, complex has " + std::to_string(e) +
                                                  " edges");
  }
  const Eigen::SparseMatrix<double> b1 = boundary_1(sc).cast<double>();
  const Eigen::SparseMatrix<double> b2 = boundary_2(sc).cast<double>();
  const std::size_t max_iter = std::max<std::size_t>(10 * sc.edge_count(), 10);
  const double cg_tol = std::max(1e-13, tol * 1e-3);

  HodgeComponents out;
  out.gradient = project_onto_image(Eigen::SparseMatrix<double>(b1.transpose()), f, cg_tol, max_iter, "gradient");
  out.curl = project_onto_image(b2, f, cg_tol, max_iter, "curl");

  out.harmonic = f - out.gradient - out.curl;

  const double scale = tol * std::max(1.0, f.squaredNorm());
  if (std::abs(out.gradient.dot(out.curl)) > scale || std::abs(out.gradient.dot(out.harmonic)) > scale ||
      std::abs(out.curl.dot(out.harmonic)) > scale) {
    throw Error(ErrorKind::SolverDivergence, "Hodge components failed the orthogonality check");
  }
  return out;
}

}  // namespace flowembed
