#pragma once

#include <functional>
#include <vector>

#include "hyperdg/basis.hpp"
#include "hyperdg/mesh.hpp"
#include "hyperdg/operators.hpp"

namespace hyperdg {

/// Advection velocity at a physical point (x, v); writes d components.
using PointField = std::function<void(const double* x, const double* v, double* a)>;

PointField constant_point_field(std::vector<double> a);

/// Row-major dense matrices over the global cell-major DoF order.
struct DenseOperator {
  index_t n = 0;
  int cell_dofs = 0;
  std::vector<double> mass_blocks;  // [cell][i][j], M is block diagonal
  std::vector<double> advection;    // A, n x n
  std::vector<double> merged;       // M^{-1} A, n x n

  std::vector<double> apply(const std::vector<double>& m, const std::vector<double>& x) const;
  std::vector<double> apply_mass(const std::vector<double>& x) const;
  double at(const std::vector<double>& m, index_t i, index_t j) const { return m[i * n + j]; }
};

inline constexpr index_t dense_dof_limit = 10000;

/// Assembles M and A by a plain loop over the d-dimensional quadrature points
/// of every cell and face, with tabulated shape functions and the full
/// d x d Jacobian inverted per point. No sum factorization.
DenseOperator assemble_dense_operator(const TensorTopology& topo, int k, QuadratureKind quadrature,
                                      const PointField& field, FluxKind flux);

}  // namespace hyperdg
