#include "hyperdg/basis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hyperdg {

namespace {

constexpr int max_points = 32;
constexpr double newton_tol = 1e-15;
constexpr int newton_max_iter = 100;

}  // namespace

std::string to_string(QuadratureKind kind) {
  return kind == QuadratureKind::gauss_legendre ? "gauss_legendre" : "gauss_lobatto";
}

QuadratureKind parse_quadrature_kind(const std::string& s) {
  if (s == "gauss_legendre" || s == "gauss" || s == "gl") return QuadratureKind::gauss_legendre;
  if (s == "gauss_lobatto" || s == "lobatto" || s == "gll" || s == "collocation")
    return QuadratureKind::gauss_lobatto;
  throw std::invalid_argument("unknown quadrature kind '" + s + "'");
}

LegendreValue legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  // derivative from P_n and P_{n-1}; valid away from the endpoints
  double dp;
  if (std::abs(x) < 1.0)
    dp = n * (x * p1 - p0) / (x * x - 1.0);
  else
    dp = (x > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0)) * 0.5 * n * (n + 1.0);
  return {p1, dp};
}

QuadratureRule1D gauss_legendre_rule(int n_q) {
  if (n_q < 1 || n_q > max_points)
    throw std::invalid_argument("Gauss-Legendre rule needs 1 <= n_q <= 32");
  std::vector<double> ref(n_q), w(n_q);
  for (int i = 0; i < (n_q + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n_q + 0.5));
    bool converged = false;
    for (int it = 0; it < newton_max_iter; ++it) {
      const auto [p, dp] = legendre(n_q, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < newton_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("Gauss-Legendre Newton iteration did not converge");
    const double dp = legendre(n_q, x).dp;
    const double wi = 2.0 / ((1.0 - x * x) * dp * dp);
    ref[i] = -x;
    ref[n_q - 1 - i] = x;
    w[i] = w[n_q - 1 - i] = wi;
  }
  if (n_q % 2 == 1) ref[n_q / 2] = 0.0;

  QuadratureRule1D rule{QuadratureKind::gauss_legendre, n_q, {}, {}};
  rule.points.resize(n_q);
  rule.weights.resize(n_q);
  for (int i = 0; i < n_q; ++i) {
    rule.points[i] = 0.5 * (1.0 + ref[i]);
    rule.weights[i] = 0.5 * w[i];
  }
  return rule;
}

QuadratureRule1D gauss_lobatto_rule(int n_q) {
  if (n_q < 2 || n_q > max_points)
    throw std::invalid_argument("Gauss-Lobatto rule needs 2 <= n_q <= 32");
  const int N = n_q - 1;
  std::vector<double> ref(n_q), w(n_q);
  ref[0] = -1.0;
  ref[N] = 1.0;
  // interior nodes are the roots of P_N'; Newton with (1-x^2) P'' = 2x P' - N(N+1) P
  for (int i = 1; i < (n_q + 1) / 2; ++i) {
    double x = -std::cos(std::numbers::pi * i / N);
    bool converged = false;
    for (int it = 0; it < newton_max_iter; ++it) {
      const auto [p, dp] = legendre(N, x);
      const double ddp = (2.0 * x * dp - N * (N + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < newton_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("Gauss-Lobatto Newton iteration did not converge");
    ref[i] = x;
    ref[N - i] = -x;
  }
  if (n_q % 2 == 1) ref[N / 2] = 0.0;
  for (int i = 0; i < n_q; ++i) {
    const double p = legendre(N, ref[i]).p;
    w[i] = 2.0 / (N * (N + 1.0) * p * p);
  }

  QuadratureRule1D rule{QuadratureKind::gauss_lobatto, n_q, {}, {}};
  rule.points.resize(n_q);
  rule.weights.resize(n_q);
  for (int i = 0; i < n_q; ++i) {
    rule.points[i] = 0.5 * (1.0 + ref[i]);
    rule.weights[i] = 0.5 * w[i];
  }
  rule.points.front() = 0.0;
  rule.points.back() = 1.0;
  return rule;
}

QuadratureRule1D make_rule(QuadratureKind kind, int n_q) {
  return kind == QuadratureKind::gauss_legendre ? gauss_legendre_rule(n_q) : gauss_lobatto_rule(n_q);
}

LagrangeBasis::LagrangeBasis(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  const int n = size();
  denominators_.assign(n, 1.0);
  for (int i = 0; i < n; ++i)
    for (int m = 0; m < n; ++m)
      if (m != i) denominators_[i] *= nodes_[i] - nodes_[m];
}

double LagrangeBasis::value(int i, double x) const {
  double num = 1.0;
  for (int m = 0; m < size(); ++m)
    if (m != i) num *= x - nodes_[m];
  return num / denominators_[i];
}

double LagrangeBasis::derivative(int i, double x) const {
  double sum = 0.0;
  for (int m = 0; m < size(); ++m) {
    if (m == i) continue;
    double prod = 1.0;
    for (int r = 0; r < size(); ++r)
      if (r != i && r != m) prod *= x - nodes_[r];
    sum += prod;
  }
  return sum / denominators_[i];
}

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols, rows);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& o) const {
  if (cols != o.rows) throw std::invalid_argument("matrix product shape mismatch");
  DenseMatrix p(rows, o.cols);
  for (int r = 0; r < rows; ++r)
    for (int m = 0; m < cols; ++m)
      for (int c = 0; c < o.cols; ++c) p(r, c) += (*this)(r, m) * o(m, c);
  return p;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::abs(v));
  return m;
}

DenseMatrix invert(const DenseMatrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("cannot invert a non-square matrix");
  const int n = m.rows;
  DenseMatrix a = m, inv = DenseMatrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw std::runtime_error("singular matrix");
    for (int c = 0; c < n; ++c) {
      std::swap(a(col, c), a(piv, c));
      std::swap(inv(col, c), inv(piv, c));
    }
    const double d = a(col, col);
    for (int c = 0; c < n; ++c) {
      a(col, c) /= d;
      inv(col, c) /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a(r, col);
      if (f == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        a(r, c) -= f * a(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  return inv;
}

Matrix1D::Matrix1D(DenseMatrix m, double symmetry_tol) : dense_(std::move(m)) {
  identity_ = dense_.rows == dense_.cols;
  for (int r = 0; r < dense_.rows && identity_; ++r)
    for (int c = 0; c < dense_.cols; ++c)
      if (dense_(r, c) != (r == c ? 1.0 : 0.0)) {
        identity_ = false;
        break;
      }

  structure_ = Structure::dense;
  if (dense_.rows == dense_.cols && dense_.rows >= 2 && dense_.rows <= max_points) {
    const int n = dense_.rows;
    const double scale = std::max(dense_.max_abs(), 1e-300);
    bool even = true, odd = true;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const double mirror = dense_(n - 1 - r, n - 1 - c);
        if (std::abs(mirror - dense_(r, c)) > symmetry_tol * scale) even = false;
        if (std::abs(mirror + dense_(r, c)) > symmetry_tol * scale) odd = false;
      }
    if (even)
      structure_ = Structure::even;
    else if (odd)
      structure_ = Structure::odd;
  }
  if (structure_ != Structure::dense) build_even_odd();
  flops_ = structure_ == Structure::dense ? dense_flops_per_apply() : count_even_odd_flops();
}

void Matrix1D::build_even_odd() {
  const int n = dense_.rows;
  half_ = n / 2;
  const int rows_eo = (n + 1) / 2;
  even_.assign(static_cast<std::size_t>(rows_eo) * half_, 0.0);
  odd_.assign(static_cast<std::size_t>(rows_eo) * half_, 0.0);
  middle_.assign(rows_eo, 0.0);
  for (int q = 0; q < rows_eo; ++q) {
    for (int j = 0; j < half_; ++j) {
      even_[q * half_ + j] = dense_(q, j) + dense_(q, n - 1 - j);
      odd_[q * half_ + j] = dense_(q, j) - dense_(q, n - 1 - j);
    }
    if (n % 2 == 1) middle_[q] = dense_(q, half_);
  }
  if (n % 2 == 1 && structure_ == Structure::odd) middle_[half_] = 0.0;
}

std::uint64_t Matrix1D::count_even_odd_flops() const {
  const std::uint64_t n = dense_.rows;
  const std::uint64_t h = n / 2;
  const bool odd_n = n % 2 == 1;
  // projection onto symmetric/antisymmetric parts: (a +- b) * 0.5
  std::uint64_t f = 4 * h;
  // each output pair: two length-h dot products (2 per term), combine (2)
  f += h * (4 * h + 2 + (odd_n ? 2 : 0));
  if (odd_n) f += structure_ == Structure::even ? 2 * h + 2 : 2 * h;
  return f;
}

std::uint64_t Matrix1D::apply_dense(std::span<const double> x, std::span<double> y) const {
  for (int r = 0; r < dense_.rows; ++r) {
    double s = 0.0;
    for (int c = 0; c < dense_.cols; ++c) s += dense_(r, c) * x[c];
    y[r] = s;
  }
  return dense_flops_per_apply();
}

std::uint64_t Matrix1D::apply(std::span<const double> x, std::span<double> y) const {
  if (structure_ == Structure::dense) return apply_dense(x, y);
  const int n = dense_.rows;
  const int h = half_;
  std::array<double, max_points> e{}, o{};
  for (int j = 0; j < h; ++j) {
    e[j] = 0.5 * (x[j] + x[n - 1 - j]);
    o[j] = 0.5 * (x[j] - x[n - 1 - j]);
  }
  const bool odd_n = n % 2 == 1;
  for (int q = 0; q < h; ++q) {
    double se = 0.0, so = 0.0;
    for (int j = 0; j < h; ++j) {
      se += even_[q * h + j] * e[j];
      so += odd_[q * h + j] * o[j];
    }
    if (odd_n) se += middle_[q] * x[h];
    y[q] = se + so;
    y[n - 1 - q] = structure_ == Structure::even ? se - so : so - se;
  }
  if (odd_n) {
    double s = 0.0;
    if (structure_ == Structure::even) {
      for (int j = 0; j < h; ++j) s += even_[h * h + j] * e[j];
      s += middle_[h] * x[h];
    } else {
      for (int j = 0; j < h; ++j) s += odd_[h * h + j] * o[j];
    }
    y[h] = s;
  }
  return flops_;
}

double even_odd_flops_model(int k) {
  if (k < 2) throw std::invalid_argument("even-odd FLOP model is defined for k >= 2");
  const long long num = static_cast<long long>(k - 1) * (k + 1) / 2;  // floor
  return 3.0 + 2.0 * static_cast<double>(num) / (k - 1);
}

Basis1D build_basis(int k, QuadratureKind quadrature) {
  if (k < 1 || k >= max_points) throw std::invalid_argument("polynomial degree must lie in [1, 31]");
  Basis1D b;
  b.k = k;
  b.quadrature = make_rule(quadrature, k + 1);
  b.support_points = gauss_lobatto_rule(k + 1).points;
  b.collocation = quadrature == QuadratureKind::gauss_lobatto;

  const int n = k + 1;
  const int nq = b.quadrature.n_q;
  const LagrangeBasis nodal(b.support_points);
  const LagrangeBasis on_quad(b.quadrature.points);

  b.interp_to_quad = DenseMatrix(nq, n);
  b.grad_at_quad = DenseMatrix(nq, n);
  for (int q = 0; q < nq; ++q)
    for (int i = 0; i < n; ++i) {
      b.interp_to_quad(q, i) = nodal.value(i, b.quadrature.points[q]);
      b.grad_at_quad(q, i) = nodal.derivative(i, b.quadrature.points[q]);
    }
  if (b.collocation) b.interp_to_quad = DenseMatrix::identity(n);
  b.inverse_vandermonde = b.collocation ? DenseMatrix::identity(n) : invert(b.interp_to_quad);

  b.quad_derivative = DenseMatrix(nq, nq);
  for (int q = 0; q < nq; ++q) {
    double diag = 0.0;
    for (int p = 0; p < nq; ++p) {
      if (p == q) continue;
      b.quad_derivative(q, p) = on_quad.derivative(p, b.quadrature.points[q]);
      diag -= b.quad_derivative(q, p);
    }
    b.quad_derivative(q, q) = diag;
  }

  for (int side = 0; side < 2; ++side) {
    b.quad_face_value[side].resize(nq);
    DenseMatrix row(1, nq);
    for (int p = 0; p < nq; ++p) {
      b.quad_face_value[side][p] = on_quad.value(p, static_cast<double>(side));
      row(0, p) = b.quad_face_value[side][p];
    }
    b.face_eval[side] = Matrix1D(row);
    b.face_eval_t[side] = Matrix1D(row.transposed());
  }

  b.interp = Matrix1D(b.interp_to_quad);
  b.interp_t = Matrix1D(b.interp_to_quad.transposed());
  b.inverse_v = Matrix1D(b.inverse_vandermonde);
  b.inverse_v_t = Matrix1D(b.inverse_vandermonde.transposed());
  b.derivative = Matrix1D(b.quad_derivative);
  b.derivative_t = Matrix1D(b.quad_derivative.transposed());
  return b;
}

}  // namespace hyperdg
