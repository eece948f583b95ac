#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/Jacobi>

#include "qstar/rng.hpp"

namespace qstar {

struct KrylovOptions {
  /// Krylov subspace dimension; 0 picks max(2k + 1, k + 20), capped at n.
  Eigen::Index subspace = 0;
  int max_restarts = 1000;
  double tol = 1e-12;
  std::uint64_t seed = 0x5eed;
  /// Operators of at most this dimension are formed and solved densely.
  Eigen::Index dense_limit = 200;
  /// Largest-magnitude solver only: selects which of the k Ritz values must
  /// meet `tol`, given the value and the current leading value. Empty means
  /// all of them.
  std::function<bool(std::complex<double>, std::complex<double>)> must_converge;
};

template <typename Scalar>
struct EigsResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  bool converged = false;
  int restarts = 0;
  Eigen::Index matvecs = 0;
};

namespace detail {

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> random_unit(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = Scalar(2.0 * rng.uniform() - 1.0);
  v.normalize();
  return v;
}

// Extends the Krylov decomposition A V_j = V_j H_j + f e_j^T from `start`
// columns to m columns of V (V has m + 1 columns; column m receives the
// normalized residual). Returns the norm of the final residual.
template <typename Scalar, typename Apply>
double arnoldi_extend(Apply& apply, Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& V,
                      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& H, Eigen::Index start, Eigen::Index m,
                      Eigen::Index& matvecs, std::uint64_t seed) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = V.rows();
  Vector w(n);
  double beta = 0.0;
  for (Eigen::Index j = start; j < m; ++j) {
    apply(V.col(j), w);
    ++matvecs;
    const double wnorm = w.norm();
    Vector h = V.leftCols(j + 1).adjoint() * w;
    w.noalias() -= V.leftCols(j + 1) * h;
    // Second Gram-Schmidt pass keeps the basis orthonormal to working
    // precision.
    const Vector h2 = V.leftCols(j + 1).adjoint() * w;
    w.noalias() -= V.leftCols(j + 1) * h2;
    h += h2;
    H.col(j).head(j + 1) = h;
    beta = w.norm();
    if (beta <= 1e-13 * std::max(wnorm, 1.0)) {
      // Invariant subspace: continue with a fresh direction orthogonal to V.
      beta = 0.0;
      w = random_unit<Scalar>(n, seed + static_cast<std::uint64_t>(matvecs));
      for (int pass = 0; pass < 2; ++pass) w -= V.leftCols(j + 1) * (V.leftCols(j + 1).adjoint() * w);
      w.normalize();
    } else {
      w /= beta;
    }
    if (j + 1 < m) H(j + 1, j) = Scalar(beta);
    V.col(j + 1) = w;
  }
  return beta;
}

// Eigenvector of the leading (j+1) x (j+1) block of upper-triangular T for
// the eigenvalue T(j, j), by back substitution.
inline Eigen::VectorXcd triangular_eigenvector(const Eigen::MatrixXcd& T, Eigen::Index j) {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(j + 1);
  y[j] = 1.0;
  const std::complex<double> lambda = T(j, j);
  const double guard = std::numeric_limits<double>::epsilon() * std::max(1.0, T.cwiseAbs().maxCoeff());
  for (Eigen::Index i = j - 1; i >= 0; --i) {
    std::complex<double> acc = 0.0;
    for (Eigen::Index l = i + 1; l <= j; ++l) acc += T(i, l) * y[l];
    std::complex<double> denom = T(i, i) - lambda;
    if (std::abs(denom) < guard) denom = guard;
    y[i] = -acc / denom;
  }
  return y / y.norm();
}

// Moves the diagonal entry at position `from` of an upper-triangular Schur
// factor T to position `to` < `from` by adjacent unitary swaps, updating the
// Schur vectors U accordingly.
inline void schur_move(Eigen::MatrixXcd& T, Eigen::MatrixXcd& U, Eigen::Index from, Eigen::Index to) {
  for (Eigen::Index p = from - 1; p >= to; --p) {
    // The first column of the rotation must be the eigenvector of the 2 x 2
    // block belonging to T(p+1, p+1).
    Eigen::JacobiRotation<std::complex<double>> rot;
    rot.makeGivens(T(p, p + 1), T(p + 1, p + 1) - T(p, p));
    T.applyOnTheLeft(p, p + 1, rot.adjoint());
    T.applyOnTheRight(p, p + 1, rot);
    U.applyOnTheRight(p, p + 1, rot);
    T(p + 1, p) = 0.0;
  }
}

template <typename Scalar, typename Apply>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dense_operator(Apply& apply, Eigen::Index n,
                                                                     Eigen::Index& matvecs) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> M(n, n);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> e = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n), y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = Scalar(1);
    apply(e, y);
    ++matvecs;
    M.col(j) = y;
    e[j] = Scalar(0);
  }
  return M;
}

}  // namespace detail

/// Largest algebraic eigenvalues of a real symmetric operator given as
/// apply(x, y) computing y = A x. Thick-restart Lanczos with full
/// reorthogonalization; small problems (n <= subspace or dense_limit) are solved densely.
/// Values are returned in descending order.
template <typename Apply>
EigsResult<double> largest_symmetric_eigs(Apply&& apply, Eigen::Index n, Eigen::Index k,
                                          const KrylovOptions& options = {}) {
  using Eigen::Index;
  EigsResult<double> result;
  k = std::min(k, n);
  if (k <= 0) {
    result.converged = true;
    return result;
  }
  const Index m = std::min(n, options.subspace > 0 ? std::max(options.subspace, k + 1) : std::max(2 * k + 1, k + 20));
  if (m >= n || n <= options.dense_limit) {
    const Eigen::MatrixXd M = detail::dense_operator<double>(apply, n, result.matvecs);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
    result.values = solver.eigenvalues().reverse().head(k);
    result.converged = true;
    return result;
  }

  Eigen::MatrixXd V(n, m + 1);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
  V.col(0) = detail::random_unit<double>(n, options.seed);
  Index kept = 0;
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    result.restarts = restart;
    const double beta = detail::arnoldi_extend<double>(apply, V, H, kept, m, result.matvecs, options.seed);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (H + H.transpose()));
    const Eigen::VectorXd ritz = solver.eigenvalues().reverse();
    const Eigen::MatrixXd Y = solver.eigenvectors().rowwise().reverse();
    const Eigen::VectorXd b = beta * Y.row(m - 1).transpose();

    const double scale = std::max(ritz.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    bool done = true;
    for (Index j = 0; j < k; ++j)
      if (std::abs(b[j]) > options.tol * std::max(std::abs(ritz[j]), 1e-3 * scale)) done = false;
    result.values = ritz.head(k);
    if (done || restart == options.max_restarts) {
      result.converged = done;
      return result;
    }

    kept = std::min(m - 1, k + (m - k) / 2);
    V.leftCols(kept) = V.leftCols(m) * Y.leftCols(kept);
    V.col(kept) = V.col(m);
    H.setZero();
    H.topLeftCorner(kept, kept) = ritz.head(kept).asDiagonal();
    H.row(kept).head(kept) = b.head(kept).transpose();
    H.col(kept).head(kept) = b.head(kept);
  }
  return result;
}

/// Eigenvalues of largest magnitude of a general operator, y = A x on
/// complex vectors. Krylov-Schur with a complex Schur decomposition of the
/// projected matrix. Values are returned in order of decreasing magnitude.
template <typename Apply>
EigsResult<std::complex<double>> largest_magnitude_eigs(Apply&& apply, Eigen::Index n, Eigen::Index k,
                                                        const KrylovOptions& options = {}) {
  using Eigen::Index;
  using Complex = std::complex<double>;
  EigsResult<Complex> result;
  k = std::min(k, n);
  if (k <= 0) {
    result.converged = true;
    return result;
  }
  auto by_magnitude = [](const Eigen::VectorXcd& v) {
    std::vector<Complex> out(v.data(), v.data() + v.size());
    std::stable_sort(out.begin(), out.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
    return out;
  };
  const Index m = std::min(n, options.subspace > 0 ? std::max(options.subspace, k + 1) : std::max(2 * k + 1, k + 20));
  if (m >= n || n <= options.dense_limit) {
    const Eigen::MatrixXcd M = detail::dense_operator<Complex>(apply, n, result.matvecs);
    // A real operator takes the (several times faster) real solver.
    const bool real = M.imag().cwiseAbs().maxCoeff() == 0.0;
    const auto sorted = by_magnitude(real ? Eigen::EigenSolver<Eigen::MatrixXd>(M.real(), false).eigenvalues()
                                          : Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(M, false).eigenvalues());
    result.values = Eigen::Map<const Eigen::VectorXcd>(sorted.data(), k);
    result.converged = true;
    return result;
  }

  Eigen::MatrixXcd V(n, m + 1);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m, m);
  V.col(0) = detail::random_unit<Complex>(n, options.seed);
  Index kept = 0;
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    result.restarts = restart;
    const double beta = detail::arnoldi_extend<Complex>(apply, V, H, kept, m, result.matvecs, options.seed);
    Eigen::ComplexSchur<Eigen::MatrixXcd> schur(H);
    Eigen::MatrixXcd T = schur.matrixT();
    Eigen::MatrixXcd U = schur.matrixU();
    // Selection sort of the diagonal by decreasing magnitude.
    for (Index i = 0; i < m; ++i) {
      Index best = i;
      for (Index j = i + 1; j < m; ++j)
        if (std::abs(T(j, j)) > std::abs(T(best, best))) best = j;
      if (best != i) detail::schur_move(T, U, best, i);
    }
    const Eigen::RowVectorXcd b = beta * U.row(m - 1);

    const double scale = std::max(T.diagonal().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    bool done = true;
    for (Index j = 0; j < k && done; ++j) {
      if (options.must_converge && !options.must_converge(T(j, j), T(0, 0))) continue;
      const Eigen::VectorXcd y = detail::triangular_eigenvector(T, j);
      const double residual = std::abs(b.head(j + 1).transpose().cwiseProduct(y).sum());
      if (residual > options.tol * std::max(std::abs(T(j, j)), 1e-3 * scale)) done = false;
    }
    result.values = T.diagonal().head(k);
    if (done || restart == options.max_restarts) {
      result.converged = done;
      return result;
    }

    kept = std::min(m - 1, k + (m - k) / 2);
    // Do not split a cluster of (nearly) equal-magnitude values.
    while (kept < m - 1 && std::abs(std::abs(T(kept, kept)) - std::abs(T(kept - 1, kept - 1))) <
                               1e-10 * std::abs(T(kept - 1, kept - 1)))
      ++kept;
    V.leftCols(kept) = V.leftCols(m) * U.leftCols(kept);
    V.col(kept) = V.col(m);
    H.setZero();
    H.topLeftCorner(kept, kept) = T.topLeftCorner(kept, kept);
    H.row(kept).head(kept) = b.head(kept);
  }
  return result;
}

}  // namespace qstar
