#pragma once

#include <span>
#include <string>
#include <vector>

#include "hyperdg/basis.hpp"
#include "hyperdg/mesh.hpp"

namespace hyperdg {

enum class MappingStorage { cartesian_single_set, tensor_per_space, full_highdim };

std::string to_string(MappingStorage s);
MappingStorage parse_mapping_storage(const std::string& s);

/// Geometry of one low-dimensional mesh at the tensor quadrature points of
/// each cell and of each of its 2*dim faces. Face point p enumerates the
/// tangential axes lexicographically (the normal axis is dropped).
struct LowDimGeometryTable {
  int dim = 0;
  int n_q = 0;
  index_t cells_stored = 0;  // 1 when a single set is shared by all cells
  int cell_points = 0;       // n_q^dim
  int face_points = 0;       // n_q^(dim-1)

  std::vector<double> jinv;    // [cell][q][r*dim + c]
  std::vector<double> det;     // [cell][q]
  std::vector<double> weight;  // [q] tensor quadrature weight
  std::vector<double> face_jinv;    // [cell][face][p][r*dim + c]
  std::vector<double> face_det;     // [cell][face][p]
  std::vector<double> face_weight;  // [p] tangential weight

  const double* cell_jinv(index_t slot, int q) const {
    return jinv.data() + (static_cast<std::size_t>(slot) * cell_points + q) * dim * dim;
  }
  double cell_det(index_t slot, int q) const { return det[static_cast<std::size_t>(slot) * cell_points + q]; }
  const double* face_jinv_at(index_t slot, int face, int p) const {
    return face_jinv.data() +
           ((static_cast<std::size_t>(slot) * 2 * dim + face) * face_points + p) * dim * dim;
  }
  double face_det_at(index_t slot, int face, int p) const {
    return face_det[(static_cast<std::size_t>(slot) * 2 * dim + face) * face_points + p];
  }
};

LowDimGeometryTable build_geometry_table(const LowDimMesh& mesh, const QuadratureRule1D& rule,
                                         bool single_set);

/// Multi-index helpers for points of a tensor rule.
void unflatten_point(int index, int dim, int n_q, std::span<int> out);

/// Mapping data for the phase-space operator. The tensor modes keep per-space
/// tables and combine them on the fly; full_highdim tabulates the
/// d-dimensional inverse Jacobian of every cell point and is meant for
/// verification on tiny meshes only.
class MappingTables {
 public:
  MappingTables(const TensorTopology& topo, const Basis1D& basis, MappingStorage storage);

  MappingStorage storage() const { return storage_; }
  int dim_x() const { return dx_; }
  int dim_v() const { return dv_; }
  int n_q() const { return n_q_; }
  const LowDimGeometryTable& x() const { return x_; }
  const LowDimGeometryTable& v() const { return v_; }
  index_t x_slot(index_t cx) const { return x_.cells_stored == 1 ? 0 : cx; }
  index_t v_slot(index_t cv) const { return v_.cells_stored == 1 ? 0 : cv; }

  /// out = J^{-1} a at point (q_x, q_v) of cell c; returns |J| w_q.
  double combine_jacobian(CellPair c, int q_x, int q_v, std::span<const double> a,
                          std::span<double> out) const;

  // full_highdim data
  const double* full_jinv(index_t global_cell, int q) const;
  double full_det(index_t global_cell, int q) const;
  /// |J| J^{-T} n_hat at face point p (p = tangential index in d-1 dims).
  const double* full_face_normal(index_t global_cell, int face, int p) const;

  /// Doubles held by the cell Jacobian tables (excludes faces).
  std::size_t cell_jacobian_doubles() const;

 private:
  MappingStorage storage_;
  int dx_, dv_, n_q_;
  index_t n_cx_;
  LowDimGeometryTable x_, v_;
  std::vector<double> weight_1d_;
  std::vector<double> full_jinv_, full_det_, full_normal_;
  int cell_points_ = 0, face_points_ = 0;
};

/// Doubles per DoF of cell Jacobian storage for n_q = k+1.
double mapping_memory_per_dof(int k, int dim_x, int dim_v, MappingStorage storage);

/// Small dense helpers (row-major dim x dim, dim <= 6).
double invert_small(int dim, const double* a, double* inv);

}  // namespace hyperdg
