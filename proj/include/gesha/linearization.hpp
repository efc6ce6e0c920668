#pragma once

#include <span>

#include "gesha/constraint_system.hpp"

namespace gesha {

// First-order model  value + d_first (z1 - z1^) + d_second (z2 - z2^).
struct Linearization {
  double value = 0.0;
  double d_first = 0.0;
  double d_second = 0.0;
};

// Phi(m, pi) = vf * phi(m) / pi with phi(m) = m sqrt(m^2 + eps). Throws
// SolverError when pi_hat <= 0.
Linearization linearize_friction(double m_hat, double pi_hat, double vf, double eps);

// kappa * pi_in around (kappa_hat, pi_hat): pi_hat (kappa - kappa_hat) + kappa_hat pi_in.
Linearization linearize_compressor(double kappa_hat, double pi_hat);

// Either of the above for a stored term at point z (coefficients included).
Linearization linearize(const NonlinearTerm& term, std::span<const double> z);

}  // namespace gesha
