#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hyperdg {

enum class QuadratureKind { gauss_legendre, gauss_lobatto };

std::string to_string(QuadratureKind kind);
QuadratureKind parse_quadrature_kind(const std::string& s);

/// 1D rule on the unit interval [0,1]; weights sum to one.
struct QuadratureRule1D {
  QuadratureKind kind;
  int n_q;
  std::vector<double> points;
  std::vector<double> weights;
};

QuadratureRule1D gauss_legendre_rule(int n_q);
QuadratureRule1D gauss_lobatto_rule(int n_q);
QuadratureRule1D make_rule(QuadratureKind kind, int n_q);

/// Legendre polynomial P_n and derivative on [-1,1].
struct LegendreValue {
  double p;
  double dp;
};
LegendreValue legendre(int n, double x);

/// Lagrange polynomials through a fixed set of nodes.
class LagrangeBasis {
 public:
  explicit LagrangeBasis(std::vector<double> nodes);
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  double value(int i, double x) const;
  double derivative(int i, double x) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> denominators_;
};

/// Dense row-major matrix used for the small 1D operators.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  static DenseMatrix identity(int n);

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  DenseMatrix transposed() const;
  DenseMatrix operator*(const DenseMatrix& o) const;
  double max_abs() const;
};

DenseMatrix invert(const DenseMatrix& m);

/// A 1D operator in the form used by sum factorization. Square matrices with
/// the point symmetry M(n-1-i, n-1-j) = +-M(i, j) are stored split into
/// even and odd parts; anything else is kept dense.
class Matrix1D {
 public:
  enum class Structure { even, odd, dense };

  Matrix1D() = default;
  explicit Matrix1D(DenseMatrix m, double symmetry_tol = 1e-12);

  int rows() const { return dense_.rows; }
  int cols() const { return dense_.cols; }
  Structure structure() const { return structure_; }
  const DenseMatrix& dense() const { return dense_; }
  bool is_identity() const { return identity_; }

  /// y = M x for contiguous vectors; returns the FLOPs spent.
  std::uint64_t apply(std::span<const double> x, std::span<double> y) const;
  std::uint64_t apply_dense(std::span<const double> x, std::span<double> y) const;

  /// FLOPs of one application of apply() (deterministic by construction).
  std::uint64_t flops_per_apply() const { return flops_; }
  std::uint64_t dense_flops_per_apply() const {
    return 2ull * static_cast<std::uint64_t>(rows()) * static_cast<std::uint64_t>(cols());
  }

  // Even-odd storage, exposed for the vectorized kernels.
  int half() const { return half_; }
  const std::vector<double>& even_part() const { return even_; }
  const std::vector<double>& odd_part() const { return odd_; }
  const std::vector<double>& middle_column() const { return middle_; }

 private:
  void build_even_odd();
  std::uint64_t count_even_odd_flops() const;

  DenseMatrix dense_;
  Structure structure_ = Structure::dense;
  bool identity_ = false;
  int half_ = 0;
  std::vector<double> even_;    // rows_even x half_  (M(q,j) + M(q,n-1-j))
  std::vector<double> odd_;     // rows_even x half_  (M(q,j) - M(q,n-1-j))
  std::vector<double> middle_;  // M(q, half_) for odd n
  std::uint64_t flops_ = 0;
};

/// Even-odd basis-change cost per DoF for n_q = k+1, k >= 2.
double even_odd_flops_model(int k);

/// Nodal Gauss-Lobatto basis of degree k with n_q = k+1 quadrature points.
struct Basis1D {
  int k = 0;
  QuadratureRule1D quadrature;
  std::vector<double> support_points;
  bool collocation = false;

  DenseMatrix interp_to_quad;       // n_q x (k+1): phi_i(xi_q)
  DenseMatrix grad_at_quad;         // n_q x (k+1): phi_i'(xi_q)
  DenseMatrix inverse_vandermonde;  // (k+1) x n_q
  DenseMatrix quad_derivative;      // n_q x n_q: l_p'(xi_q), l = Lagrange on quad points
  std::vector<double> quad_face_value[2];  // l_p(0), l_p(1)

  // Sum-factorization forms.
  Matrix1D interp;        // S
  Matrix1D interp_t;      // S^T
  Matrix1D inverse_v;     // S^{-1}
  Matrix1D inverse_v_t;   // S^{-T}
  Matrix1D derivative;    // D (quadrature-point collocation derivative)
  Matrix1D derivative_t;  // D^T
  Matrix1D face_eval[2];     // 1 x n_q row of l_p at xi = 0 / 1
  Matrix1D face_eval_t[2];   // n_q x 1

  int n_dofs_1d() const { return k + 1; }
  int n_q() const { return quadrature.n_q; }
};

Basis1D build_basis(int k, QuadratureKind quadrature);

}  // namespace hyperdg
