#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oracle {

namespace {

Rule from_jacobi(const Eigen::VectorXd& offdiag, int n, double mu0) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = offdiag(i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(0.5 * (es.eigenvalues()(i) + 1.0));
    const double v0 = es.eigenvectors()(0, i);
    r.w.push_back(0.5 * mu0 * v0 * v0);
  }
  return r;
}

}  // namespace

double legendre_p(int n, double t) {
  double p0 = 1.0, p1 = t;
  if (n == 0) return p0;
  for (int m = 1; m < n; ++m) {
    const double p2 = ((2.0 * m + 1.0) * t * p1 - m * p0) / (m + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

Rule gauss_legendre(int n) {
  Eigen::VectorXd b(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) b(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return from_jacobi(b, n, 2.0);
}

Rule gauss_lobatto(int n) {
  if (n < 2) throw std::invalid_argument("Gauss-Lobatto needs two points");
  Rule r;
  r.x.push_back(0.0);
  if (n > 2) {
    const int m = n - 2;
    Eigen::VectorXd b(std::max(m - 1, 0));
    for (int k = 1; k < m; ++k) b(k - 1) = std::sqrt(k * (k + 2.0) / ((2.0 * k + 1.0) * (2.0 * k + 3.0)));
    const Rule inner = from_jacobi(b, m, 1.0);
    r.x.insert(r.x.end(), inner.x.begin(), inner.x.end());
  }
  r.x.push_back(1.0);
  for (double x : r.x) {
    const double p = legendre_p(n - 1, 2.0 * x - 1.0);
    r.w.push_back(0.5 * 2.0 / (n * (n - 1.0) * p * p));
  }
  return r;
}

double lagrange(const std::vector<double>& nodes, int i, double x) {
  double v = 1.0;
  for (int j = 0; j < static_cast<int>(nodes.size()); ++j)
    if (j != i) v *= (x - nodes[j]) / (nodes[i] - nodes[j]);
  return v;
}

double lagrange_derivative(const std::vector<double>& nodes, int i, double x) {
  const int n = static_cast<int>(nodes.size());
  double sum = 0.0;
  for (int m = 0; m < n; ++m) {
    if (m == i) continue;
    double prod = 1.0 / (nodes[i] - nodes[m]);
    for (int j = 0; j < n; ++j)
      if (j != i && j != m) prod *= (x - nodes[j]) / (nodes[i] - nodes[j]);
    sum += prod;
  }
  return sum;
}

DG1D dg1d(int k, const Rule& quad, int cells, double h, double speed, bool upwind) {
  const std::vector<double> nodes = gauss_lobatto(k + 1).x;
  const int nb = k + 1;
  const int n = cells * nb;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n), A = Eigen::MatrixXd::Zero(n, n);
  const double s = upwind ? 1.0 : 0.0;
  // F = alpha u_minus + beta u_plus for a.n
  auto coeffs = [&](double an) { return std::pair{0.5 * an + 0.5 * s * std::abs(an), 0.5 * an - 0.5 * s * std::abs(an)}; };
  for (int c = 0; c < cells; ++c) {
    const int o = c * nb;
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        for (std::size_t q = 0; q < quad.x.size(); ++q) {
          M(o + i, o + j) += h * quad.w[q] * lagrange(nodes, i, quad.x[q]) * lagrange(nodes, j, quad.x[q]);
          A(o + i, o + j) += speed * quad.w[q] * lagrange_derivative(nodes, i, quad.x[q]) * lagrange(nodes, j, quad.x[q]);
        }
    // nodal basis on Gauss-Lobatto points: traces are the end nodes
    const int right = ((c + 1) % cells) * nb, left = ((c + cells - 1) % cells) * nb;
    auto [ar, br] = coeffs(speed);
    A(o + k, o + k) -= ar;
    A(o + k, right + 0) -= br;
    auto [al, bl] = coeffs(-speed);
    A(o + 0, o + 0) -= al;
    A(o + 0, left + k) -= bl;
  }
  const Eigen::MatrixXd Mi = M.inverse();
  const Eigen::MatrixXd MA = Mi * A;
  DG1D r;
  r.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      r.mass.push_back(M(i, j));
      r.advection.push_back(A(i, j));
      r.merged.push_back(MA(i, j));
    }
  return r;
}

namespace {

struct Layout {
  int d, nb;
  std::vector<long> cell_stride, node_stride;
  long cells_x, nd, total;
};

Layout layout_of(const CartesianProblem& p) {
  Layout L;
  L.d = static_cast<int>(p.cells.size());
  L.nb = p.k + 1;
  L.nd = 1;
  for (int a = 0; a < L.d; ++a) L.nd *= L.nb;
  L.cells_x = 1;
  for (int a = 0; a < p.d_x; ++a) L.cells_x *= p.cells[a];
  long cs = 1;
  L.cell_stride.resize(L.d);
  for (int a = 0; a < L.d; ++a) {
    if (a == p.d_x) cs = L.cells_x;
    L.cell_stride[a] = cs;
    cs *= p.cells[a];
  }
  long ns = 1;
  L.node_stride.resize(L.d);
  for (int a = 0; a < L.d; ++a) {
    L.node_stride[a] = ns;
    ns *= L.nb;
  }
  L.total = cs * L.nd;
  return L;
}

// Splits a global index into per-axis (cell, node) coordinates.
void split(const Layout& L, const CartesianProblem& p, long g, std::vector<int>& cell, std::vector<int>& node) {
  const long c = g / L.nd, local = g % L.nd;
  long cx = c % L.cells_x, cv = c / L.cells_x;
  for (int a = 0; a < L.d; ++a) {
    long& rem = a < p.d_x ? cx : cv;
    cell[a] = static_cast<int>(rem % p.cells[a]);
    rem /= p.cells[a];
    node[a] = static_cast<int>((local / L.node_stride[a]) % L.nb);
  }
}

long join(const Layout& L, const std::vector<int>& cell, const std::vector<int>& node) {
  long c = 0, local = 0;
  for (int a = 0; a < L.d; ++a) {
    c += cell[a] * L.cell_stride[a];
    local += node[a] * L.node_stride[a];
  }
  return c * L.nd + local;
}

std::vector<double> kronecker(const CartesianProblem& p, const std::vector<double>& x, bool mass) {
  const Layout L = layout_of(p);
  if (static_cast<long>(x.size()) != L.total) throw std::invalid_argument("oracle: vector size mismatch");
  const Rule quad = p.lobatto_quadrature ? gauss_lobatto(p.k + 1) : gauss_legendre(p.k + 1);
  std::vector<DG1D> ops;
  for (int a = 0; a < L.d; ++a)
    ops.push_back(dg1d(p.k, quad, p.cells[a], p.length[a] / p.cells[a], p.speed[a], p.upwind));
  std::vector<double> y(L.total, 0.0);
  std::vector<int> cell(L.d), node(L.d), c2(L.d), n2(L.d);
  for (long g = 0; g < L.total; ++g) {
    split(L, p, g, cell, node);
    double acc = 0.0;
    if (mass) {
      // tensor product of 1D cell mass blocks
      for (long h = 0; h < L.nd; ++h) {
        double prod = 1.0;
        for (int a = 0; a < L.d; ++a) {
          n2[a] = static_cast<int>((h / L.node_stride[a]) % L.nb);
          const int n1 = ops[a].n;
          const int row = cell[a] * L.nb + node[a], col = cell[a] * L.nb + n2[a];
          prod *= ops[a].mass[static_cast<std::size_t>(row) * n1 + col];
        }
        acc += prod * x[join(L, cell, n2)];
      }
    } else {
      for (int a = 0; a < L.d; ++a) {
        const int n1 = ops[a].n;
        const int row = cell[a] * L.nb + node[a];
        c2 = cell;
        n2 = node;
        for (int col = 0; col < n1; ++col) {
          const double m = ops[a].merged[static_cast<std::size_t>(row) * n1 + col];
          if (m == 0.0) continue;
          c2[a] = col / L.nb;
          n2[a] = col % L.nb;
          acc += m * x[join(L, c2, n2)];
        }
      }
    }
    y[g] = acc;
  }
  return y;
}

}  // namespace

std::vector<double> kronecker_apply(const CartesianProblem& p, const std::vector<double>& x) {
  return kronecker(p, x, false);
}

std::vector<double> kronecker_mass(const CartesianProblem& p, const std::vector<double>& x) {
  return kronecker(p, x, true);
}

std::complex<double> plasma_z(std::complex<double> z) {
  using namespace std::complex_literals;
  const double pi = std::acos(-1.0);
  if (std::abs(z.imag()) < 0.02) throw std::invalid_argument("oracle Z needs |Im z| >= 0.02");
  const double h = 1e-3, L = 10.0;
  std::complex<double> sum = 0.0;
  for (double t = -L; t <= L + 0.5 * h; t += h) sum += std::exp(-t * t) / (t - z);
  sum *= h / std::sqrt(pi);
  if (z.imag() < 0) sum += 2.0i * std::sqrt(pi) * std::exp(-z * z);
  return sum;
}

std::complex<double> dispersion(std::complex<double> omega, double kappa) {
  const std::complex<double> z = omega / (std::sqrt(2.0) * kappa);
  return 1.0 + (1.0 + z * plasma_z(z)) / (kappa * kappa);
}

std::complex<double> dispersion_root(double kappa, std::complex<double> guess) {
  std::complex<double> w0 = guess, w1 = guess * 1.01;
  std::complex<double> f0 = dispersion(w0, kappa), f1 = dispersion(w1, kappa);
  for (int it = 0; it < 60 && std::abs(w1 - w0) > 1e-13; ++it) {
    const std::complex<double> w2 = w1 - f1 * (w1 - w0) / (f1 - f0);
    w0 = w1;
    f0 = f1;
    w1 = w2;
    f1 = dispersion(w1, kappa);
  }
  return w1;
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& e) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
