#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hyperdg/basis.hpp"
#include "hyperdg/counters.hpp"
#include "hyperdg/mesh.hpp"

namespace hyperdg {

/// Extents of a tensor of point values; axis 0 runs fastest.
struct TensorShape {
  int rank = 0;
  std::array<int, max_dim> extents{1, 1, 1, 1, 1, 1};

  static TensorShape uniform(int rank, int n);
  std::size_t size() const;
  TensorShape with_extent(int dim, int n) const;
  /// Shape of a face tensor: drop axis `dim`.
  TensorShape without(int dim) const;
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

/// Batch of v_len cells in structure-of-arrays layout: for each local point
/// index the v_len lane values are contiguous.
struct CellBatch {
  TensorShape shape;
  int v_len = 1;
  std::vector<double> values;

  CellBatch() = default;
  CellBatch(TensorShape s, int lanes)
      : shape(s), v_len(lanes), values(s.size() * static_cast<std::size_t>(lanes), 0.0) {}

  double& at(std::size_t point, int lane) { return values[point * v_len + lane]; }
  double at(std::size_t point, int lane) const { return values[point * v_len + lane]; }
};

bool valid_v_len(int v_len);

/// Mode-`dim` tensor-matrix product: out(.., j, ..) = sum_i M(j, i) in(.., i, ..).
/// With accumulate the result is added to out. in and out must not alias.
void contract_dim(const Matrix1D& m, int dim, const TensorShape& in_shape, int v_len,
                  std::span<const double> in, std::span<double> out, OpCounters& counters,
                  bool accumulate = false);

/// Scratch doubles the composite kernels need for a d-dimensional cell batch.
std::size_t kernel_scratch_size(const Basis1D& basis, int dim_x, int dim_v, int v_len);

/// Nodal coefficients to values at the cell quadrature points (d sweeps with
/// the interpolation matrix). A no-op copy for the collocation basis.
void interpolate_to_quadrature(const Basis1D& basis, int dim, int v_len,
                               std::span<const double> nodal, std::span<double> quad,
                               std::span<double> scratch, OpCounters& counters);

/// Sum over directions of D_j^T t_j at the quadrature points (result stays in
/// the collocation basis of the quadrature points).
void test_gradient_collocation(const Basis1D& basis, int dim, int v_len,
                               std::span<const std::span<const double>> flux,
                               std::span<double> out, std::span<double> scratch,
                               OpCounters& counters, bool accumulate = false);

/// sum_q grad phi_i(xi_q) . t_q for all nodal basis functions i.
void integrate_test_gradient(const Basis1D& basis, int dim, int v_len,
                             std::span<const std::span<const double>> flux,
                             std::span<double> nodal, std::span<double> scratch,
                             OpCounters& counters);

/// Values at the quadrature points of cell face `face` (2*axis + side), from
/// values at the cell quadrature points: one sweep along the face normal.
void interpolate_to_face(const Basis1D& basis, int dim, int face, int v_len,
                         std::span<const double> quad, std::span<double> face_values,
                         OpCounters& counters);

/// Applies S (or any square 1D operator) along every axis of a tensor of the
/// given rank; used for face traces (rank d-1). Collocation skips the work.
void apply_all_dims(const Matrix1D& m, int rank, int n, int v_len, std::span<const double> in,
                    std::span<double> out, std::span<double> scratch, OpCounters& counters);

/// Indices of the nodal DoFs of a cell lying on face `face`, in lexicographic
/// order of the remaining axes.
std::vector<int> face_dof_indices(int dim, int n_1d, int face);

}  // namespace hyperdg
