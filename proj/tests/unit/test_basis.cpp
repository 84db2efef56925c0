#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "hyperdg/basis.hpp"
#include "oracles.hpp"

using namespace hyperdg;

namespace {

double integrate(const QuadratureRule1D& r, int p) {
  double s = 0.0;
  for (int q = 0; q < r.n_q; ++q) s += r.weights[q] * std::pow(r.points[q], p);
  return s;
}

}  // namespace

TEST_SUITE("basis") {

TEST_CASE("small Gauss-Legendre rules") {
  const auto one = gauss_legendre_rule(1);
  CHECK(one.points[0] == doctest::Approx(0.5));
  CHECK(one.weights[0] == doctest::Approx(1.0));
  const auto two = gauss_legendre_rule(2);
  CHECK(two.points[0] == doctest::Approx(0.5 - 0.5 / std::sqrt(3.0)));
  CHECK(two.points[1] == doctest::Approx(0.5 + 0.5 / std::sqrt(3.0)));
  CHECK(two.weights[0] == doctest::Approx(0.5));
}

TEST_CASE("small Gauss-Lobatto rules") {
  const auto two = gauss_lobatto_rule(2);
  CHECK(two.points[0] == 0.0);
  CHECK(two.points[1] == 1.0);
  CHECK(two.weights[0] == doctest::Approx(0.5));
  const auto three = gauss_lobatto_rule(3);
  CHECK(three.points[1] == doctest::Approx(0.5));
  CHECK(three.weights[0] == doctest::Approx(1.0 / 6.0));
  CHECK(three.weights[1] == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(gauss_lobatto_rule(1), std::invalid_argument);
}

TEST_CASE("exactness degrees") {
  CHECK(std::abs(integrate(gauss_legendre_rule(5), 9) - 0.1) < 1e-14);
  const auto gll4 = gauss_lobatto_rule(4);
  CHECK(std::abs(integrate(gll4, 5) - 1.0 / 6.0) < 1e-14);
  CHECK(std::abs(integrate(gll4, 6) - 1.0 / 7.0) > 1e-6);
}

TEST_CASE("rules agree with the Golub-Welsch oracle") {
  for (int n = 1; n <= 12; ++n) {
    const auto a = gauss_legendre_rule(n);
    const auto o = oracle::gauss_legendre(n);
    for (int q = 0; q < n; ++q) {
      CHECK(std::abs(a.points[q] - o.x[q]) < 1e-14);
      CHECK(std::abs(a.weights[q] - o.w[q]) < 1e-14);
    }
  }
  for (int n = 2; n <= 12; ++n) {
    const auto a = gauss_lobatto_rule(n);
    const auto o = oracle::gauss_lobatto(n);
    for (int q = 0; q < n; ++q) {
      CHECK(std::abs(a.points[q] - o.x[q]) < 1e-14);
      CHECK(std::abs(a.weights[q] - o.w[q]) < 1e-14);
    }
  }
}

TEST_CASE("Legendre values") {
  for (int n = 0; n <= 8; ++n)
    for (double x : {-0.9, -0.3, 0.0, 0.41, 1.0}) CHECK(legendre(n, x).p == doctest::Approx(oracle::legendre_p(n, x)));
  CHECK(legendre(3, 1.0).dp == doctest::Approx(6.0));
}

TEST_CASE("Lagrange basis agrees with the oracle and sums to one") {
  const auto nodes = gauss_lobatto_rule(5).points;
  const LagrangeBasis b(nodes);
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    double sum = 0.0, dsum = 0.0;
    for (int i = 0; i < 5; ++i) {
      CHECK(b.value(i, x) == doctest::Approx(oracle::lagrange(nodes, i, x)));
      CHECK(b.derivative(i, x) == doctest::Approx(oracle::lagrange_derivative(nodes, i, x)));
      sum += b.value(i, x);
      dsum += b.derivative(i, x);
    }
    CHECK(sum == doctest::Approx(1.0));
    CHECK(std::abs(dsum) < 1e-11);
  }
}

TEST_CASE("collocation basis has identity interpolation") {
  for (int k = 1; k <= 6; ++k) {
    const Basis1D b = build_basis(k, QuadratureKind::gauss_lobatto);
    CHECK(b.collocation);
    CHECK(b.interp.is_identity());
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j) CHECK(b.interp_to_quad(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));
  }
}

TEST_CASE("inverse Vandermonde inverts the interpolation") {
  for (int k = 1; k <= 7; ++k) {
    const Basis1D b = build_basis(k, QuadratureKind::gauss_legendre);
    CHECK_FALSE(b.collocation);
    const DenseMatrix p = b.inverse_vandermonde * b.interp_to_quad;
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j) CHECK(std::abs(p(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
  }
}

TEST_CASE("collocation derivative differentiates polynomials exactly") {
  const Basis1D b = build_basis(4, QuadratureKind::gauss_legendre);
  const auto& x = b.quadrature.points;
  for (int p = 0; p <= 4; ++p)
    for (int q = 0; q < b.n_q(); ++q) {
      double s = 0.0;
      for (int j = 0; j < b.n_q(); ++j) s += b.quad_derivative(q, j) * std::pow(x[j], p);
      CHECK(s == doctest::Approx(p == 0 ? 0.0 : p * std::pow(x[q], p - 1)));
    }
}

TEST_CASE("face evaluation extrapolates to the end points") {
  const Basis1D b = build_basis(3, QuadratureKind::gauss_legendre);
  const auto& x = b.quadrature.points;
  for (int side = 0; side < 2; ++side) {
    double s = 0.0;
    for (int j = 0; j < b.n_q(); ++j) s += b.quad_face_value[side][j] * std::pow(x[j], 3);
    CHECK(s == doctest::Approx(side == 0 ? 0.0 : 1.0));
  }
}

TEST_CASE("symmetric matrices are stored in even-odd form") {
  const Basis1D b = build_basis(3, QuadratureKind::gauss_legendre);
  CHECK(b.interp.structure() == Matrix1D::Structure::even);
  CHECK(b.derivative.structure() == Matrix1D::Structure::odd);
  DenseMatrix m(3, 3);
  m(0, 0) = 1;
  m(0, 1) = 2;
  CHECK(Matrix1D(m).structure() == Matrix1D::Structure::dense);
}

TEST_CASE("even-odd FLOP model") {
  CHECK(even_odd_flops_model(3) == doctest::Approx(7.0));
  CHECK_THROWS_AS(even_odd_flops_model(1), std::invalid_argument);
  for (int k = 2; k <= 7; ++k) {
    const Basis1D b = build_basis(k, QuadratureKind::gauss_legendre);
    const double per_dof = static_cast<double>(b.interp.flops_per_apply()) / (k + 1);
    CHECK(std::abs(per_dof / even_odd_flops_model(k) - 1.0) <= 0.1);
    CHECK(b.interp.flops_per_apply() < b.interp.dense_flops_per_apply());
  }
}

TEST_CASE("even-odd apply equals the dense product") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int k = 1; k <= 7; ++k) {
    const Basis1D b = build_basis(k, QuadratureKind::gauss_legendre);
    const int n = k + 1;
    std::vector<double> x(n), y(n), z(n);
    for (auto& v : x) v = u(rng);
    for (const Matrix1D* m : {&b.interp, &b.interp_t, &b.derivative, &b.derivative_t, &b.inverse_v}) {
      const auto f = m->apply(x, y);
      CHECK(f == m->flops_per_apply());
      m->apply_dense(x, z);
      for (int i = 0; i < n; ++i) CHECK(std::abs(y[i] - z[i]) < 1e-13);
    }
  }
}

TEST_CASE("dense inverse") {
  DenseMatrix m(2, 2);
  m(0, 0) = 4;
  m(0, 1) = 7;
  m(1, 0) = 2;
  m(1, 1) = 6;
  const DenseMatrix i = invert(m);
  CHECK(i(0, 0) == doctest::Approx(0.6));
  CHECK(i(0, 1) == doctest::Approx(-0.7));
  DenseMatrix s(2, 2);
  CHECK_THROWS(invert(s));
}

TEST_CASE("degree limits and names") {
  CHECK_THROWS_AS(build_basis(0, QuadratureKind::gauss_legendre), std::invalid_argument);
  CHECK(parse_quadrature_kind(to_string(QuadratureKind::gauss_lobatto)) == QuadratureKind::gauss_lobatto);
  CHECK_THROWS_AS(parse_quadrature_kind("simpson"), std::invalid_argument);
}

}
