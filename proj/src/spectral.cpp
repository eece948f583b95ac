#include "qstar/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <ostream>

#include "qstar/errors.hpp"

namespace qstar {

std::string to_string(MatrixKind kind) {
  return kind == MatrixKind::modularity ? "modularity" : "non_backtracking";
}

Index default_k(const Graph& g, int expected_q) {
  return std::max<Index>(1, std::min<Index>(g.num_vertices() / 2, 2 * expected_q + 10));
}

void modularity_apply(const Graph& g, double alpha, const Eigen::Ref<const Eigen::VectorXd>& x,
                      Eigen::Ref<Eigen::VectorXd> y) {
  const double two_l = 2.0 * static_cast<double>(g.num_edges());
  double dx = 0.0;
  for (Index v = 0; v < g.num_vertices(); ++v) {
    double acc = 0.0;
    for (Index w : g.neighbors(v)) acc += x[w];
    y[v] = acc;
    dx += static_cast<double>(g.degree(v)) * x[v];
  }
  if (two_l > 0.0)
    for (Index v = 0; v < g.num_vertices(); ++v) y[v] -= alpha * dx / two_l * static_cast<double>(g.degree(v));
}

void nb_apply(const Graph& g, const Eigen::Ref<const Eigen::VectorXcd>& x, Eigen::Ref<Eigen::VectorXcd> y) {
  const Index n = g.num_vertices();
  for (Index v = 0; v < n; ++v) {
    std::complex<double> acc = 0.0;
    for (Index w : g.neighbors(v)) acc += x[n + w];
    y[v] = static_cast<double>(g.degree(v) - 1) * x[n + v];
    y[n + v] = acc - x[v];
  }
}

double modularity_band_edge(const Graph& g) {
  if (g.num_edges() == 0) return 0.0;
  const Eigen::VectorXd d = g.degree_vector();
  const double branching = d.squaredNorm() / d.sum() - 1.0;
  return 2.0 * std::sqrt(std::max(branching, 0.0));
}

SpectralReport modularity_eigs(const Graph& g, double alpha, const SpectralOptions& options) {
  const Index n = g.num_vertices();
  if (g.num_edges() == 0) throw DomainError("spectral estimates need at least one edge");
  SpectralReport report;
  report.kind = MatrixKind::modularity;
  report.band_edge = modularity_band_edge(g);
  report.band_edge_note = "estimate: 2 sqrt(<d^2>/<d> - 1)";
  Index k = std::min(n, options.k > 0 ? options.k : default_k(g));
  while (true) {
    auto op = [&](const auto& x, auto& y) { modularity_apply(g, alpha, x, y); };
    const auto eigs = largest_symmetric_eigs(op, n, k, options.krylov);
    report.eigenvalues.assign(eigs.values.data(), eigs.values.data() + eigs.values.size());
    report.converged = eigs.converged;
    report.k_requested = k;
    report.isolated = static_cast<int>(
        std::count_if(report.eigenvalues.begin(), report.eigenvalues.end(), [&](double l) { return l > report.band_edge; }));
    if (!options.adaptive || report.isolated < k || k >= n) break;
    k = std::min(n, 2 * k);
  }
  report.imag.assign(report.eigenvalues.size(), 0.0);
  report.q_star = report.isolated + 1;
  return report;
}

SpectralReport nb_eigs(const Graph& g, const SpectralOptions& options) {
  const Index dim = 2 * g.num_vertices();
  if (g.num_edges() == 0) throw DomainError("spectral estimates need at least one edge");
  SpectralReport report;
  report.kind = MatrixKind::non_backtracking;
  report.band_edge_note = "sqrt(rho(B))";
  Index k = std::min(dim, options.k > 0 ? options.k : default_k(g));
  auto is_real = [](std::complex<double> l) { return std::abs(l.imag()) < 1e-6 * std::abs(l); };
  while (true) {
    auto op = [&](const auto& x, auto& y) { nb_apply(g, x, y); };
    KrylovOptions krylov = options.krylov;
    if (!krylov.must_converge) {
      // Bulk values crowd the circle of radius sqrt(rho) and converge very
      // slowly; only values clearly outside it are needed to full accuracy.
      krylov.must_converge = [](std::complex<double> l, std::complex<double> lead) {
        return std::abs(l) > kNbBulkMargin * std::sqrt(std::abs(lead));
      };
    }
    const auto eigs = largest_magnitude_eigs(op, dim, k, krylov);
    std::vector<std::complex<double>> values(eigs.values.data(), eigs.values.data() + eigs.values.size());
    report.converged = eigs.converged;
    report.k_requested = k;

    double rho = 0.0;
    for (auto l : values)
      if (is_real(l)) rho = std::max(rho, l.real());
    report.spectral_radius = rho;
    report.band_edge = std::sqrt(rho);
    report.isolated = static_cast<int>(std::count_if(values.begin(), values.end(), [&](std::complex<double> l) {
      return is_real(l) && l.real() > report.band_edge;
    }));

    std::sort(values.begin(), values.end(), [](auto a, auto b) { return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag(); });
    report.eigenvalues.clear();
    report.imag.clear();
    for (auto l : values) {
      report.eigenvalues.push_back(l.real());
      report.imag.push_back(l.imag());
    }
    // Once some computed value lies inside the band the real outliers are
    // all present; only when every value is an outlier can more remain.
    if (!options.adaptive || report.isolated < static_cast<int>(values.size()) || k >= dim) break;
    k = std::min(dim, 2 * k);
  }
  report.q_star = report.isolated;
  return report;
}

SpectrumHistogram modularity_spectrum_histogram(const Graph& g, double alpha, int bins) {
  const Index n = g.num_vertices();
  if (n > 5000) throw DomainError("full spectrum limited to N <= 5000; use the leading-k eigenvalue mode instead");
  if (bins < 1) throw DomainError("need at least one histogram bin");
  Eigen::MatrixXd Q = Eigen::MatrixXd(g.adjacency_matrix());
  if (g.num_edges() > 0) {
    const Eigen::VectorXd d = g.degree_vector();
    Q -= alpha / (2.0 * static_cast<double>(g.num_edges())) * d * d.transpose();
  }
  SpectrumHistogram h;
  h.eigenvalues = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q, Eigen::EigenvaluesOnly).eigenvalues();
  h.band_edge = modularity_band_edge(g);
  double lo = n > 0 ? h.eigenvalues.minCoeff() : 0.0;
  double hi = n > 0 ? h.eigenvalues.maxCoeff() : 0.0;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  h.count.assign(static_cast<std::size_t>(bins), 0);
  for (int b = 0; b < bins; ++b) {
    h.bin_left.push_back(lo + b * width);
    h.bin_right.push_back(b + 1 == bins ? hi : lo + (b + 1) * width);
  }
  for (Index i = 0; i < n; ++i) {
    const auto b = static_cast<int>(std::floor((h.eigenvalues[i] - lo) / width));
    ++h.count[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))];
  }
  return h;
}

void write_histogram_csv(const SpectrumHistogram& h, std::ostream& out) {
  out.precision(17);
  out << "bin_left,bin_right,count\n";
  for (std::size_t b = 0; b < h.count.size(); ++b) out << h.bin_left[b] << ',' << h.bin_right[b] << ',' << h.count[b] << '\n';
  out << "# band_edge," << h.band_edge << '\n';
}

}  // namespace qstar
