#include "hyperdg/poisson.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hyperdg {

namespace {

using cplx = std::complex<double>;

// Mode-`axis` product of a complex tensor with an (m x extent[axis]) matrix.
std::vector<cplx> contract(const std::vector<cplx>& in, std::vector<std::size_t>& extents, int axis,
                           const std::vector<cplx>& mat, std::size_t m) {
  std::size_t inner = 1, outer = 1;
  for (int a = 0; a < axis; ++a) inner *= extents[a];
  for (std::size_t a = axis + 1; a < extents.size(); ++a) outer *= extents[a];
  const std::size_t n = extents[axis];
  std::vector<cplx> out(inner * m * outer);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t i = 0; i < inner; ++i) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += mat[r * n + j] * in[(o * n + j) * inner + i];
        out[(o * m + r) * inner + i] = s;
      }
  extents[axis] = m;
  return out;
}

}  // namespace

PeriodicPoisson::PeriodicPoisson(std::vector<int> n, std::vector<double> length, std::vector<double> origin)
    : n_(std::move(n)), length_(std::move(length)), origin_(std::move(origin)) {
  if (n_.empty() || n_.size() > 3 || length_.size() != n_.size() || origin_.size() != n_.size())
    throw std::invalid_argument("Poisson grid needs 1-3 axes with matching lengths");
  for (std::size_t a = 0; a < n_.size(); ++a) {
    if (n_[a] < 1 || !(length_[a] > 0)) throw std::invalid_argument("invalid Poisson grid axis");
    total_ *= n_[a];
  }
  phi_hat_.assign(total_, 0.0);
}

void PeriodicPoisson::solve(std::span<const double> rho) {
  if (rho.size() != total_) throw std::invalid_argument("density sample count mismatch");
  double mean = 0.0;
  for (double r : rho) mean += r;
  mean /= static_cast<double>(total_);

  std::vector<cplx> data(total_);
  for (std::size_t i = 0; i < total_; ++i) data[i] = rho[i] - mean;
  std::vector<std::size_t> ext(n_.begin(), n_.end());
  for (int a = 0; a < dim(); ++a) {
    const int n = n_[a];
    std::vector<cplx> f(static_cast<std::size_t>(n) * n);
    for (int m = 0; m < n; ++m)
      for (int j = 0; j < n; ++j)
        f[m * n + j] = std::polar(1.0 / n, -2.0 * std::numbers::pi * ((static_cast<long>(m) * j) % n) / n);
    data = contract(data, ext, a, f, n);
  }

  for (std::size_t i = 0; i < total_; ++i) {
    std::size_t rem = i;
    double k2 = 0.0;
    for (int a = 0; a < dim(); ++a) {
      const int m = static_cast<int>(rem % n_[a]);
      rem /= n_[a];
      const int s = m <= n_[a] / 2 ? m : m - n_[a];
      const double kappa = 2.0 * std::numbers::pi * s / length_[a];
      k2 += kappa * kappa;
    }
    phi_hat_[i] = k2 > 0 ? data[i] / k2 : cplx(0.0);
  }
}

std::vector<double> PeriodicPoisson::evaluate(const std::vector<std::vector<double>>& coords, int deriv_axis,
                                              Deriv kind) const {
  if (static_cast<int>(coords.size()) != dim()) throw std::invalid_argument("coordinate axes mismatch");
  std::vector<cplx> data = phi_hat_;
  std::vector<std::size_t> ext(n_.begin(), n_.end());
  for (int a = 0; a < dim(); ++a) {
    const int n = n_[a];
    const std::size_t P = coords[a].size();
    std::vector<cplx> b(P * n);
    for (std::size_t p = 0; p < P; ++p) {
      const double y = coords[a][p] - origin_[a];
      for (int m = 0; m < n; ++m) {
        const bool nyquist = n % 2 == 0 && m == n / 2;
        const int s = m < (n + 1) / 2 ? m : m - n;
        const double kappa = 2.0 * std::numbers::pi * s / length_[a];
        cplx v = nyquist ? cplx(std::cos(kappa * y)) : std::polar(1.0, kappa * y);
        if (a == deriv_axis) {
          if (kind == Deriv::first) v = nyquist ? cplx(0.0) : cplx(0.0, kappa) * v;
          if (kind == Deriv::second) v *= -kappa * kappa;
        }
        b[p * n + m] = v;
      }
    }
    data = contract(data, ext, a, b, P);
  }
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = data[i].real();
  return out;
}

std::vector<double> PeriodicPoisson::phi_at(const std::vector<std::vector<double>>& coords) const {
  return evaluate(coords, -1, Deriv::none);
}

std::vector<double> PeriodicPoisson::field_at(const std::vector<std::vector<double>>& coords) const {
  const int d = dim();
  std::vector<double> out;
  for (int m = 0; m < d; ++m) {
    const std::vector<double> g = evaluate(coords, m, Deriv::first);
    if (out.empty()) out.assign(g.size() * d, 0.0);
    for (std::size_t p = 0; p < g.size(); ++p) out[p * d + m] = -g[p];
  }
  return out;
}

std::vector<double> PeriodicPoisson::neg_laplacian_at(const std::vector<std::vector<double>>& coords) const {
  std::vector<double> out;
  for (int m = 0; m < dim(); ++m) {
    const std::vector<double> g = evaluate(coords, m, Deriv::second);
    if (out.empty()) out.assign(g.size(), 0.0);
    for (std::size_t p = 0; p < g.size(); ++p) out[p] -= g[p];
  }
  return out;
}

}  // namespace hyperdg
