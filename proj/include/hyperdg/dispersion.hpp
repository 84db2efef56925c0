#pragma once

#include <complex>

namespace hyperdg {

/// Plasma dispersion function Z (Fried-Conte), valid in the whole complex
/// plane via its power series.
std::complex<double> plasma_z(std::complex<double> zeta);

/// D(omega) = 1 + (1 + zeta Z(zeta)) / kappa^2, zeta = omega / (sqrt(2) kappa).
std::complex<double> landau_dispersion(std::complex<double> omega, double kappa);

struct LandauRoot {
  double omega;  // real frequency
  double gamma;  // damping rate of the field amplitude (positive when damped)
  int iterations;
};

/// Least-damped root of the linear Landau dispersion relation, by Newton
/// iteration from the Bohm-Gross estimate.
LandauRoot landau_root(double kappa);

}  // namespace hyperdg
