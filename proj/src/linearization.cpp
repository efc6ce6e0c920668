#include "gesha/linearization.hpp"

#include <cmath>
#include <string>

#include "gesha/errors.hpp"

namespace gesha {

Linearization linearize_friction(double m_hat, double pi_hat, double vf, double eps) {
  if (!(pi_hat > 0.0)) {
    throw SolverError("friction linearization at non-positive pressure " + std::to_string(pi_hat));
  }
  const double root = std::sqrt(m_hat * m_hat + eps);
  const double phi = m_hat * root;
  const double dphi = root > 0.0 ? root + m_hat * m_hat / root : 0.0;
  return {vf * phi / pi_hat, vf * dphi / pi_hat, -vf * phi / (pi_hat * pi_hat)};
}

Linearization linearize_compressor(double kappa_hat, double pi_hat) {
  return {kappa_hat * pi_hat, pi_hat, kappa_hat};
}

Linearization linearize(const NonlinearTerm& term, std::span<const double> z) {
  const double a = z[static_cast<std::size_t>(term.first)];
  const double b = z[static_cast<std::size_t>(term.second)];
  Linearization lin;
  switch (term.kind) {
    case NonlinearKind::kFriction:
      lin = linearize_friction(a, b, term.coef, term.smoothing);
      break;
    case NonlinearKind::kBilinear:
      lin = linearize_compressor(a, b);
      lin.value *= term.coef;
      lin.d_first *= term.coef;
      lin.d_second *= term.coef;
      break;
  }
  return lin;
}

}  // namespace gesha
