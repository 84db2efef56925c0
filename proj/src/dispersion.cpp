#include "hyperdg/dispersion.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hyperdg {

std::complex<double> plasma_z(std::complex<double> zeta) {
  using cplx = std::complex<double>;
  if (std::abs(zeta) > 6.0) throw std::domain_error("plasma_z series limited to |zeta| <= 6");
  // Z = i sqrt(pi) exp(-z^2) - 2 z sum_n (-2 z^2)^n / (2n+1)!!
  const cplx z2 = zeta * zeta;
  cplx term = 1.0, sum = 1.0;
  for (int n = 1; n < 400; ++n) {
    term *= -2.0 * z2 / static_cast<double>(2 * n + 1);
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return cplx(0.0, std::sqrt(std::numbers::pi)) * std::exp(-z2) - 2.0 * zeta * sum;
}

std::complex<double> landau_dispersion(std::complex<double> omega, double kappa) {
  const std::complex<double> zeta = omega / (std::sqrt(2.0) * kappa);
  return 1.0 + (1.0 + zeta * plasma_z(zeta)) / (kappa * kappa);
}

LandauRoot landau_root(double kappa) {
  using cplx = std::complex<double>;
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  cplx omega(std::sqrt(1.0 + 3.0 * kappa * kappa), -0.05);
  const double s = std::sqrt(2.0) * kappa;
  for (int it = 1; it <= 100; ++it) {
    const cplx zeta = omega / s;
    const cplx z = plasma_z(zeta);
    const cplx dz = -2.0 * (1.0 + zeta * z);
    const cplx f = 1.0 + (1.0 + zeta * z) / (kappa * kappa);
    const cplx df = (z + zeta * dz) / (kappa * kappa * s);
    const cplx step = f / df;
    omega -= step;
    if (std::abs(step) < 1e-14 * std::abs(omega)) return {omega.real(), -omega.imag(), it};
  }
  throw std::runtime_error("Landau root iteration did not converge");
}

}  // namespace hyperdg
