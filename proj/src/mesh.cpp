#include "hyperdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hyperdg {

LowDimMesh::LowDimMesh(int dim, std::span<const int> subdivisions,
                       std::span<const double> lower, std::span<const double> upper,
                       Deformation deformation)
    : dim_(dim), deformation_(deformation) {
  if (dim < 1 || dim > max_lowdim)
    throw std::invalid_argument("low-dimensional mesh needs 1 <= dim <= 3, got " +
                                std::to_string(dim));
  if (static_cast<int>(subdivisions.size()) != dim || static_cast<int>(lower.size()) != dim ||
      static_cast<int>(upper.size()) != dim)
    throw std::invalid_argument("mesh parameter arrays must have one entry per axis");

  cell_count_ = 1;
  for (int a = 0; a < dim; ++a) {
    if (subdivisions[a] < 1)
      throw std::invalid_argument("subdivisions must be positive on every axis");
    if (!(upper[a] > lower[a])) throw std::invalid_argument("empty extent on axis " + std::to_string(a));
    subdivisions_[a] = subdivisions[a];
    lower_[a] = lower[a];
    upper_[a] = upper[a];
    cell_count_ *= subdivisions[a];
  }

  if (deformation_.kind == Deformation::Kind::sinusoidal) {
    const int max_sub = *std::max_element(subdivisions_.begin(), subdivisions_.begin() + dim);
    // det(I + eps*L*grad(g)^T) >= 1 - 2*pi*dim*eps, so both bounds keep the map bijective
    const double bound = 0.5 / (std::numbers::pi * std::max(max_sub, dim));
    if (!(std::abs(deformation_.amplitude) < bound))
      throw std::invalid_argument("deformation amplitude " + std::to_string(deformation_.amplitude) +
                                  " violates bijectivity bound " + std::to_string(bound));
  }
}

LowDimMesh LowDimMesh::unit(int dim, std::span<const int> subdivisions, Deformation deformation) {
  const std::array<double, max_lowdim> lo{0.0, 0.0, 0.0};
  const std::array<double, max_lowdim> hi{1.0, 1.0, 1.0};
  const auto n = static_cast<std::size_t>(std::clamp(dim, 0, max_lowdim));
  return LowDimMesh(dim, subdivisions, std::span(lo).first(n), std::span(hi).first(n), deformation);
}

double LowDimMesh::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= extent(a);
  return v;
}

LowDimArray<int> LowDimMesh::cell_coords(index_t cell) const {
  LowDimArray<int> c{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    c[a] = static_cast<int>(cell % subdivisions_[a]);
    cell /= subdivisions_[a];
  }
  return c;
}

index_t LowDimMesh::cell_index(const LowDimArray<int>& coords) const {
  index_t idx = 0;
  for (int a = dim_ - 1; a >= 0; --a) idx = idx * subdivisions_[a] + coords[a];
  return idx;
}

index_t LowDimMesh::neighbor(index_t cell, int face) const {
  auto c = cell_coords(cell);
  const int axis = face / 2;
  const int n = subdivisions_[axis];
  c[axis] = (face % 2 == 0) ? (c[axis] + n - 1) % n : (c[axis] + 1) % n;
  return cell_index(c);
}

index_t LowDimMesh::inner_face_count() const {
  // one face per cell and axis (the high side); periodic wrap closes the rest
  return cell_count_ * dim_;
}

PointGeometry LowDimMesh::geometry(index_t cell, std::span<const double> xi) const {
  PointGeometry g;
  const auto c = cell_coords(cell);
  LowDimArray<double> y{};
  LowDimArray<double> h{};
  for (int a = 0; a < dim_; ++a) {
    h[a] = cell_width(a);
    y[a] = lower_[a] + (c[a] + xi[a]) * h[a];
  }

  const double eps =
      deformation_.kind == Deformation::Kind::sinusoidal ? deformation_.amplitude : 0.0;
  constexpr double two_pi = 2.0 * std::numbers::pi;

  // g(y) = prod_i sin(2 pi yhat_i) and its gradient
  LowDimArray<double> s{}, co{};
  for (int a = 0; a < dim_; ++a) {
    const double yhat = (y[a] - lower_[a]) / extent(a);
    s[a] = std::sin(two_pi * yhat);
    co[a] = std::cos(two_pi * yhat);
  }
  double gval = 1.0;
  for (int a = 0; a < dim_; ++a) gval *= s[a];
  LowDimArray<double> grad{};
  for (int i = 0; i < dim_; ++i) {
    double p = two_pi / extent(i) * co[i];
    for (int j = 0; j < dim_; ++j)
      if (j != i) p *= s[j];
    grad[i] = p;
  }

  for (int r = 0; r < dim_; ++r) {
    g.x[r] = y[r] + eps * extent(r) * gval;
    for (int col = 0; col < dim_; ++col) {
      const double dphi = (r == col ? 1.0 : 0.0) + eps * extent(r) * grad[col];
      g.jacobian[r][col] = dphi * h[col];
    }
  }

  const auto& J = g.jacobian;
  switch (dim_) {
    case 1: g.det = J[0][0]; break;
    case 2: g.det = J[0][0] * J[1][1] - J[0][1] * J[1][0]; break;
    default:
      g.det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
              J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
              J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
  }
  return g;
}

TensorTopology::TensorTopology(LowDimMesh mesh_x, LowDimMesh mesh_v)
    : mesh_x_(std::move(mesh_x)), mesh_v_(std::move(mesh_v)) {
  if (dim() < 2 || dim() > max_dim)
    throw std::invalid_argument("phase-space dimension must lie in [2, 6]");
}

CellPair TensorTopology::neighbor(CellPair c, int face) const {
  const int fx = 2 * dim_x();
  if (face < fx) return {mesh_x_.neighbor(c.cx, face), c.cv};
  return {c.cx, mesh_v_.neighbor(c.cv, face - fx)};
}

std::vector<TensorFace> TensorTopology::inner_faces() const {
  std::vector<TensorFace> faces;
  faces.reserve(static_cast<std::size_t>(inner_face_count()));
  for (index_t cv = 0; cv < mesh_v_.cell_count(); ++cv)
    for (index_t cx = 0; cx < mesh_x_.cell_count(); ++cx)
      for (int a = 0; a < dim_x(); ++a)
        faces.push_back({TensorFace::Space::x, {cx, cv}, {mesh_x_.neighbor(cx, 2 * a + 1), cv},
                         2 * a + 1});
  for (index_t cv = 0; cv < mesh_v_.cell_count(); ++cv)
    for (index_t cx = 0; cx < mesh_x_.cell_count(); ++cx)
      for (int a = 0; a < dim_v(); ++a)
        faces.push_back({TensorFace::Space::v, {cx, cv}, {cx, mesh_v_.neighbor(cv, 2 * a + 1)},
                         2 * a + 1});
  return faces;
}

index_t TensorTopology::inner_face_count() const {
  return mesh_x_.inner_face_count() * mesh_v_.cell_count() +
         mesh_x_.cell_count() * mesh_v_.inner_face_count();
}

index_t checked_pow(index_t base, int exponent) {
  index_t r = 1;
  for (int i = 0; i < exponent; ++i) {
    if (r > std::numeric_limits<index_t>::max() / base)
      throw std::overflow_error("integer power overflows the index type");
    r *= base;
  }
  return r;
}

index_t dof_count(index_t n_cells, int k, int dim) {
  if (k < 1) throw std::invalid_argument("polynomial degree must be >= 1");
  const index_t per_cell = checked_pow(k + 1, dim);
  if (n_cells != 0 && per_cell > std::numeric_limits<index_t>::max() / n_cells)
    throw std::overflow_error("DoF count overflows the index type");
  return n_cells * per_cell;
}

index_t dof_count(const TensorTopology& topo, int k) { return dof_count(topo.n_cells(), k, topo.dim()); }

}  // namespace hyperdg
