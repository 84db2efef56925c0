#include "hyperdg/dense_operator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace hyperdg {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PointData {
  std::vector<double> phi;               // [i]
  std::vector<std::vector<double>> dphi; // [axis][i], reference gradient
};

// Shape functions and reference gradients at xi (d coordinates).
PointData tabulate(const LagrangeBasis& lag, int d, const double* xi, int nd) {
  const int n = lag.size();
  PointData p;
  p.phi.assign(nd, 1.0);
  p.dphi.assign(d, std::vector<double>(nd, 1.0));
  for (int i = 0; i < nd; ++i) {
    int rem = i;
    for (int a = 0; a < d; ++a) {
      const int ia = rem % n;
      rem /= n;
      const double v = lag.value(ia, xi[a]);
      const double dv = lag.derivative(ia, xi[a]);
      p.phi[i] *= v;
      for (int b = 0; b < d; ++b) p.dphi[b][i] *= (a == b ? dv : v);
    }
  }
  return p;
}

struct FullGeometry {
  Eigen::MatrixXd jinv;
  double det;
  double x[max_lowdim];
  double v[max_lowdim];
};

FullGeometry full_geometry(const TensorTopology& topo, CellPair c, const double* xi) {
  const int dx = topo.dim_x(), dv = topo.dim_v(), d = dx + dv;
  const PointGeometry gx = topo.mesh_x().geometry(c.cx, std::span<const double>(xi, dx));
  const PointGeometry gv = topo.mesh_v().geometry(c.cv, std::span<const double>(xi + dx, dv));
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, d);
  for (int r = 0; r < dx; ++r)
    for (int s = 0; s < dx; ++s) J(r, s) = gx.jacobian[r][s];
  for (int r = 0; r < dv; ++r)
    for (int s = 0; s < dv; ++s) J(dx + r, dx + s) = gv.jacobian[r][s];
  FullGeometry g;
  g.det = J.determinant();
  if (!(g.det > 0)) throw std::domain_error("non-positive Jacobian determinant");
  g.jinv = J.inverse();
  for (int a = 0; a < dx; ++a) g.x[a] = gx.x[a];
  for (int a = 0; a < dv; ++a) g.v[a] = gv.x[a];
  return g;
}

}  // namespace

PointField constant_point_field(std::vector<double> a) {
  return [a = std::move(a)](const double*, const double*, double* out) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i];
  };
}

std::vector<double> DenseOperator::apply(const std::vector<double>& m, const std::vector<double>& x) const {
  if (static_cast<index_t>(x.size()) != n) throw std::invalid_argument("dense apply size mismatch");
  std::vector<double> y(n, 0.0);
  for (index_t i = 0; i < n; ++i) {
    double s = 0.0;
    const double* row = m.data() + i * n;
    for (index_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<double> DenseOperator::apply_mass(const std::vector<double>& x) const {
  if (static_cast<index_t>(x.size()) != n) throw std::invalid_argument("dense apply size mismatch");
  std::vector<double> y(n, 0.0);
  const index_t nc = n / cell_dofs;
  for (index_t c = 0; c < nc; ++c)
    for (int i = 0; i < cell_dofs; ++i) {
      double s = 0.0;
      for (int j = 0; j < cell_dofs; ++j)
        s += mass_blocks[(c * cell_dofs + i) * cell_dofs + j] * x[c * cell_dofs + j];
      y[c * cell_dofs + i] = s;
    }
  return y;
}

DenseOperator assemble_dense_operator(const TensorTopology& topo, int k, QuadratureKind quadrature,
                                      const PointField& field, FluxKind flux) {
  const int d = topo.dim();
  const int n1 = k + 1;
  const index_t nd = checked_pow(n1, d);
  const index_t n = dof_count(topo, k);
  if (n > dense_dof_limit) throw std::invalid_argument("dense operator limited to 10^4 DoFs");

  const QuadratureRule1D rule = make_rule(quadrature, n1);
  const LagrangeBasis lag(gauss_lobatto_rule(n1).points);

  DenseOperator op;
  op.n = n;
  op.cell_dofs = static_cast<int>(nd);
  op.mass_blocks.assign(static_cast<std::size_t>(topo.n_cells()) * nd * nd, 0.0);
  op.advection.assign(static_cast<std::size_t>(n) * n, 0.0);
  auto A = [&](index_t i, index_t j) -> double& { return op.advection[i * n + j]; };

  const index_t n_points = nd;  // n_q = k+1
  std::vector<double> xi(d), a(d), xi_nb(d);

  for (index_t g = 0; g < topo.n_cells(); ++g) {
    const CellPair c = topo.cell_pair(g);
    const index_t row0 = g * nd;
    double* M = op.mass_blocks.data() + g * nd * nd;

    for (index_t q = 0; q < n_points; ++q) {
      double w = 1.0;
      index_t rem = q;
      for (int ax = 0; ax < d; ++ax) {
        const int qa = static_cast<int>(rem % n1);
        rem /= n1;
        xi[ax] = rule.points[qa];
        w *= rule.weights[qa];
      }
      const FullGeometry geo = full_geometry(topo, c, xi.data());
      const PointData pd = tabulate(lag, d, xi.data(), static_cast<int>(nd));
      field(geo.x, geo.v, a.data());
      const Eigen::VectorXd b = geo.jinv * Eigen::Map<const Eigen::VectorXd>(a.data(), d);
      const double jw = w * geo.det;
      for (index_t i = 0; i < nd; ++i) {
        double gi = 0.0;
        for (int ax = 0; ax < d; ++ax) gi += b(ax) * pd.dphi[ax][i];
        for (index_t j = 0; j < nd; ++j) {
          M[i * nd + j] += jw * pd.phi[i] * pd.phi[j];
          A(row0 + i, row0 + j) += jw * gi * pd.phi[j];
        }
      }
    }

    for (int f = 0; f < 2 * d; ++f) {
      const int axis = f / 2, side = f % 2;
      const CellPair nb = topo.neighbor(c, f);
      const index_t col_nb = topo.global_index(nb) * nd;
      const index_t n_face = checked_pow(n1, d - 1);
      for (index_t p = 0; p < n_face; ++p) {
        double w = 1.0;
        index_t rem = p;
        for (int ax = 0; ax < d; ++ax) {
          if (ax == axis) {
            xi[ax] = side;
            continue;
          }
          const int qa = static_cast<int>(rem % n1);
          rem /= n1;
          xi[ax] = rule.points[qa];
          w *= rule.weights[qa];
        }
        xi_nb = xi;
        xi_nb[axis] = 1 - side;
        const FullGeometry geo = full_geometry(topo, c, xi.data());
        field(geo.x, geo.v, a.data());
        // a . (|J| J^{-T} n_ref)
        const double sign = side == 0 ? -1.0 : 1.0;
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += a[m] * sign * geo.jinv(axis, m) * geo.det;
        s *= w;
        const double dm = numerical_flux(1.0, 0.0, s, flux);
        const double dp = numerical_flux(0.0, 1.0, s, flux);
        const PointData own = tabulate(lag, d, xi.data(), static_cast<int>(nd));
        const PointData other = tabulate(lag, d, xi_nb.data(), static_cast<int>(nd));
        for (index_t i = 0; i < nd; ++i) {
          if (own.phi[i] == 0.0) continue;
          for (index_t j = 0; j < nd; ++j) {
            A(row0 + i, row0 + j) -= own.phi[i] * dm * own.phi[j];
            A(row0 + i, col_nb + j) -= own.phi[i] * dp * other.phi[j];
          }
        }
      }
    }
  }

  op.merged.assign(op.advection.size(), 0.0);
  for (index_t g = 0; g < topo.n_cells(); ++g) {
    Eigen::Map<const RowMatrix> M(op.mass_blocks.data() + g * nd * nd, nd, nd);
    Eigen::Map<const RowMatrix> rows(op.advection.data() + g * nd * n, nd, n);
    Eigen::Map<RowMatrix> out(op.merged.data() + g * nd * n, nd, n);
    out = M.partialPivLu().solve(rows);
  }
  return op;
}

}  // namespace hyperdg
