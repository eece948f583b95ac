#include "qstar/model.hpp"

#include <cmath>

#include "qstar/errors.hpp"

namespace qstar {

double ModelParams::beta() const { return std::log(omega_in / omega_out); }

double ModelParams::alpha(Index num_edges) const {
  const double two_l = 2.0 * static_cast<double>(num_edges);
  const double b = beta();
  if (b == 0.0) return two_l * omega_out;
  return two_l * (omega_in - omega_out) / b;
}

ModelParams ModelParams::from_alpha_beta(double alpha, double beta, Index num_edges) {
  const double two_l = 2.0 * static_cast<double>(num_edges);
  if (two_l <= 0.0) throw DomainError("affinities need at least one edge");
  if (beta == 0.0) return {alpha / two_l, alpha / two_l};
  // omega_in - omega_out = alpha beta / 2L and omega_in = omega_out e^beta.
  const double omega_out = alpha * beta / (two_l * std::expm1(beta));
  return {omega_out * std::exp(beta), omega_out};
}

void ModelParams::validate() const {
  if (!(std::isfinite(omega_in) && omega_in > 0.0 && std::isfinite(omega_out) && omega_out > 0.0))
    throw DomainError("affinities omega_in and omega_out must be finite and positive");
}

double beta_star(int q, double c) {
  if (!(c > 1.0)) throw DomainError("beta_star requires average degree c > 1");
  return std::log(q / (std::sqrt(c) - 1.0) + 1.0);
}

double beta_zero(int q, double c) {
  if (!(c > 1.0)) throw DomainError("beta_zero requires average degree c > 1");
  return std::log(q / (c - 1.0) + 1.0);
}

}  // namespace qstar
