#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qstar/graph.hpp"
#include "qstar/krylov.hpp"

namespace qstar {

enum class MatrixKind { modularity, non_backtracking };

std::string to_string(MatrixKind kind);

struct SpectralReport {
  MatrixKind kind = MatrixKind::modularity;
  /// Real parts of the computed leading eigenvalues, descending.
  std::vector<double> eigenvalues;
  /// Imaginary parts, parallel to `eigenvalues` (all zero for modularity).
  std::vector<double> imag;
  double band_edge = 0.0;
  /// Number of isolated eigenvalues, i.e. those beyond the band edge
  /// (non-backtracking: real ones only).
  int isolated = 0;
  /// Estimated number of clusters.
  int q_star = 0;
  Index k_requested = 0;
  /// rho(B) for the non-backtracking matrix, 0 otherwise.
  double spectral_radius = 0.0;
  bool converged = false;
  /// How the band edge was obtained.
  std::string band_edge_note;
};

/// Non-backtracking values with magnitude up to this multiple of sqrt(rho)
/// are treated as bulk and not iterated to full accuracy, unless
/// krylov.must_converge is set by the caller.
inline constexpr double kNbBulkMargin = 1.05;

struct SpectralOptions {
  /// Eigenvalues to compute; 0 means default_k(g).
  Index k = 0;
  /// Double k while every computed eigenvalue is still outside the band.
  bool adaptive = true;
  KrylovOptions krylov;
};

/// min(N / 2, 2 * expected_q + 10), at least 1.
Index default_k(const Graph& g, int expected_q = 10);

/// y = A x - alpha (d^T x / 2L) d, the modularity matrix applied to x.
void modularity_apply(const Graph& g, double alpha, const Eigen::Ref<const Eigen::VectorXd>& x,
                      Eigen::Ref<Eigen::VectorXd> y);

/// y = [[0, D - I], [-I, A]] x for the 2N x 2N companion form of the
/// non-backtracking matrix.
void nb_apply(const Graph& g, const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> y);

/// 2 sqrt(<d^2>/<d> - 1), the branching-ratio estimate of the bulk edge.
double modularity_band_edge(const Graph& g);

/// Leading algebraic eigenvalues of the modularity matrix. Eigenvalues above
/// the band edge are counted as isolated; since the degree direction is
/// projected out, q clusters produce q - 1 of them and q_star is
/// isolated + 1.
SpectralReport modularity_eigs(const Graph& g, double alpha = 1.0, const SpectralOptions& options = {});

/// Largest-magnitude eigenvalues of the non-backtracking companion matrix.
/// rho(B) is the largest real eigenvalue, the band edge is sqrt(rho(B)), and
/// q_star counts real eigenvalues (|Im| < 1e-6 |lambda|) above it.
SpectralReport nb_eigs(const Graph& g, const SpectralOptions& options = {});

struct SpectrumHistogram {
  std::vector<double> bin_left;
  std::vector<double> bin_right;
  std::vector<Index> count;
  double band_edge = 0.0;
  Eigen::VectorXd eigenvalues;  // ascending
};

/// Full modularity spectrum by dense decomposition, binned into `bins`
/// equal-width bins. Throws DomainError for N > 5000.
SpectrumHistogram modularity_spectrum_histogram(const Graph& g, double alpha, int bins);

/// CSV with header bin_left,bin_right,count and a trailing comment line
/// carrying the band edge.
void write_histogram_csv(const SpectrumHistogram& h, std::ostream& out);

}  // namespace qstar
