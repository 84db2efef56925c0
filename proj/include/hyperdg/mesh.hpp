#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace hyperdg {

inline constexpr int max_lowdim = 3;
inline constexpr int max_dim = 6;

using index_t = std::int64_t;

template <typename T>
using LowDimArray = std::array<T, max_lowdim>;

struct Deformation {
  enum class Kind { none, sinusoidal };
  Kind kind = Kind::none;
  double amplitude = 0.0;

  static Deformation none() { return {}; }
  static Deformation sinusoidal(double eps) { return {Kind::sinusoidal, eps}; }
};

/// Physical location and geometry of one point of a low-dimensional cell.
struct PointGeometry {
  LowDimArray<double> x{};
  // jacobian[r][c] = d x_r / d xi_c
  std::array<LowDimArray<double>, max_lowdim> jacobian{};
  double det = 1.0;
};

/// Periodic subdivided hyperrectangle in 1-3 dimensions.
///
/// Cells are enumerated lexicographically with axis 0 running fastest. Faces
/// of a cell are numbered 2*a (low side of axis a) and 2*a+1 (high side).
/// The optional deformation x -> x + eps*L*prod_i sin(2*pi*(x_i-lo_i)/L_i)
/// is evaluated pointwise; nothing is tabulated here.
class LowDimMesh {
 public:
  LowDimMesh(int dim, std::span<const int> subdivisions,
             std::span<const double> lower, std::span<const double> upper,
             Deformation deformation = Deformation::none());

  /// Unit hypercube [0,1]^dim.
  static LowDimMesh unit(int dim, std::span<const int> subdivisions,
                         Deformation deformation = Deformation::none());

  int dim() const { return dim_; }
  index_t cell_count() const { return cell_count_; }
  int n_faces_per_cell() const { return 2 * dim_; }
  int subdivisions(int axis) const { return subdivisions_[axis]; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const { return upper_[axis]; }
  double extent(int axis) const { return upper_[axis] - lower_[axis]; }
  double cell_width(int axis) const { return extent(axis) / subdivisions_[axis]; }
  const Deformation& deformation() const { return deformation_; }
  bool is_cartesian() const { return deformation_.kind == Deformation::Kind::none; }
  double volume() const;

  LowDimArray<int> cell_coords(index_t cell) const;
  index_t cell_index(const LowDimArray<int>& coords) const;

  index_t neighbor(index_t cell, int face) const;

  /// Number of distinct interior faces; with periodic wrap every face is one.
  index_t inner_face_count() const;

  /// Geometry at reference point xi in [0,1]^dim of a cell.
  PointGeometry geometry(index_t cell, std::span<const double> xi) const;

 private:
  int dim_;
  LowDimArray<int> subdivisions_{1, 1, 1};
  LowDimArray<double> lower_{0.0, 0.0, 0.0};
  LowDimArray<double> upper_{1.0, 1.0, 1.0};
  Deformation deformation_;
  index_t cell_count_;
};

/// Phase-space cell as a pair of low-dimensional cells.
struct CellPair {
  index_t cx = 0;
  index_t cv = 0;
  friend bool operator==(const CellPair&, const CellPair&) = default;
};

/// One inner face of the tensor topology. Faces are stored once, from the
/// side whose face id is odd (the high side along the face normal).
struct TensorFace {
  enum class Space { x, v };
  Space space;
  CellPair minus;   // cell on the low side of the face
  CellPair plus;    // cell on the high side
  int lowdim_face;  // face id within the owning low-dim space (odd)
};

/// Implicit product T_x (x) T_v. The d-dimensional mesh is never built.
class TensorTopology {
 public:
  TensorTopology(LowDimMesh mesh_x, LowDimMesh mesh_v);

  const LowDimMesh& mesh_x() const { return mesh_x_; }
  const LowDimMesh& mesh_v() const { return mesh_v_; }
  int dim_x() const { return mesh_x_.dim(); }
  int dim_v() const { return mesh_v_.dim(); }
  int dim() const { return mesh_x_.dim() + mesh_v_.dim(); }
  index_t n_cells() const { return mesh_x_.cell_count() * mesh_v_.cell_count(); }

  index_t global_index(CellPair c) const { return c.cv * mesh_x_.cell_count() + c.cx; }
  CellPair cell_pair(index_t global) const {
    return {global % mesh_x_.cell_count(), global / mesh_x_.cell_count()};
  }

  /// Faces 0..2*dim_x-1 are x-space faces, 2*dim_x..2*d-1 are v-space faces.
  CellPair neighbor(CellPair c, int face) const;

  std::vector<TensorFace> inner_faces() const;
  index_t inner_face_count() const;
  index_t boundary_face_count() const { return 0; }

 private:
  LowDimMesh mesh_x_;
  LowDimMesh mesh_v_;
};

/// |C| * (k+1)^d, with an overflow check.
index_t dof_count(index_t n_cells, int k, int dim);
index_t dof_count(const TensorTopology& topo, int k);

/// Integer power with overflow check.
index_t checked_pow(index_t base, int exponent);

}  // namespace hyperdg
