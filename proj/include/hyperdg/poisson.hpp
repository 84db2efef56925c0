#pragma once

#include <complex>
#include <span>
#include <vector>

namespace hyperdg {

/// Periodic Poisson problem -lap(phi) = rho solved by trigonometric
/// interpolation of equispaced samples. Sample j along axis a sits at
/// origin[a] + j * length[a] / n[a]. Uses a direct O(n^2) DFT per axis line.
class PeriodicPoisson {
 public:
  PeriodicPoisson(std::vector<int> n, std::vector<double> length, std::vector<double> origin);

  int dim() const { return static_cast<int>(n_.size()); }
  std::size_t size() const { return total_; }

  /// Samples in lexicographic order, axis 0 fastest. The mean is removed.
  void solve(std::span<const double> rho);

  /// Evaluate phi or E = -grad(phi) on the tensor grid of the given per-axis
  /// coordinates (axis 0 fastest). E is returned as [point][component].
  std::vector<double> phi_at(const std::vector<std::vector<double>>& coords) const;
  std::vector<double> field_at(const std::vector<std::vector<double>>& coords) const;
  /// -lap(phi) on the same kind of grid (for residual checks).
  std::vector<double> neg_laplacian_at(const std::vector<std::vector<double>>& coords) const;

  /// Spectral coefficients of phi, axis 0 fastest; index j maps to
  /// wavenumber j for j < n/2, j - n otherwise.
  const std::vector<std::complex<double>>& phi_hat() const { return phi_hat_; }

 private:
  enum class Deriv { none, first, second };
  std::vector<double> evaluate(const std::vector<std::vector<double>>& coords, int deriv_axis, Deriv kind) const;

  std::vector<int> n_;
  std::vector<double> length_, origin_;
  std::size_t total_ = 1;
  std::vector<std::complex<double>> phi_hat_;
};

}  // namespace hyperdg
