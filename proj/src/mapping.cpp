#include "hyperdg/mapping.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace hyperdg {

std::string to_string(MappingStorage s) {
  switch (s) {
    case MappingStorage::cartesian_single_set: return "cartesian_single_set";
    case MappingStorage::tensor_per_space: return "tensor_per_space";
    case MappingStorage::full_highdim: return "full_highdim";
  }
  return "?";
}

MappingStorage parse_mapping_storage(const std::string& s) {
  if (s == "cartesian_single_set") return MappingStorage::cartesian_single_set;
  if (s == "tensor_per_space") return MappingStorage::tensor_per_space;
  if (s == "full_highdim") return MappingStorage::full_highdim;
  throw std::invalid_argument("unknown mapping storage '" + s + "'");
}

void unflatten_point(int index, int dim, int n_q, std::span<int> out) {
  for (int a = 0; a < dim; ++a) {
    out[a] = index % n_q;
    index /= n_q;
  }
}

double invert_small(int dim, const double* a, double* inv) {
  double m[max_dim][2 * max_dim];
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      m[r][c] = a[r * dim + c];
      m[r][dim + c] = r == c ? 1.0 : 0.0;
    }
  double det = 1.0;
  for (int c = 0; c < dim; ++c) {
    int piv = c;
    for (int r = c + 1; r < dim; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    if (m[piv][c] == 0.0) throw std::domain_error("singular Jacobian");
    if (piv != c) {
      for (int j = 0; j < 2 * dim; ++j) std::swap(m[c][j], m[piv][j]);
      det = -det;
    }
    const double p = m[c][c];
    det *= p;
    for (int j = 0; j < 2 * dim; ++j) m[c][j] /= p;
    for (int r = 0; r < dim; ++r) {
      if (r == c) continue;
      const double f = m[r][c];
      if (f == 0.0) continue;
      for (int j = 0; j < 2 * dim; ++j) m[r][j] -= f * m[c][j];
    }
  }
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) inv[r * dim + c] = m[r][dim + c];
  return det;
}

namespace {

// Inverse of a low-dim Jacobian through its adjugate.
void adjugate_inverse(int dim, const PointGeometry& g, double* out) {
  const auto& J = g.jacobian;
  const double id = 1.0 / g.det;
  if (dim == 1) {
    out[0] = id;
  } else if (dim == 2) {
    out[0] = J[1][1] * id;
    out[1] = -J[0][1] * id;
    out[2] = -J[1][0] * id;
    out[3] = J[0][0] * id;
  } else {
    out[0] = (J[1][1] * J[2][2] - J[1][2] * J[2][1]) * id;
    out[1] = (J[0][2] * J[2][1] - J[0][1] * J[2][2]) * id;
    out[2] = (J[0][1] * J[1][2] - J[0][2] * J[1][1]) * id;
    out[3] = (J[1][2] * J[2][0] - J[1][0] * J[2][2]) * id;
    out[4] = (J[0][0] * J[2][2] - J[0][2] * J[2][0]) * id;
    out[5] = (J[0][2] * J[1][0] - J[0][0] * J[1][2]) * id;
    out[6] = (J[1][0] * J[2][1] - J[1][1] * J[2][0]) * id;
    out[7] = (J[0][1] * J[2][0] - J[0][0] * J[2][1]) * id;
    out[8] = (J[0][0] * J[1][1] - J[0][1] * J[1][0]) * id;
  }
}

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// Reference coordinates of face point p of face `face`.
void face_point_coords(int dim, int n_q, int face, int p, const std::vector<double>& pts, double* xi) {
  const int axis = face / 2;
  int rest = p;
  for (int a = 0; a < dim; ++a) {
    if (a == axis) {
      xi[a] = face % 2 == 0 ? 0.0 : 1.0;
    } else {
      xi[a] = pts[rest % n_q];
      rest /= n_q;
    }
  }
}

}  // namespace

LowDimGeometryTable build_geometry_table(const LowDimMesh& mesh, const QuadratureRule1D& rule,
                                         bool single_set) {
  LowDimGeometryTable t;
  t.dim = mesh.dim();
  t.n_q = rule.n_q;
  t.cells_stored = single_set ? 1 : mesh.cell_count();
  t.cell_points = ipow(t.n_q, t.dim);
  t.face_points = ipow(t.n_q, t.dim - 1);
  const int dd = t.dim * t.dim;
  const int nf = 2 * t.dim;

  t.weight.resize(t.cell_points);
  for (int q = 0; q < t.cell_points; ++q) {
    int idx[max_lowdim];
    unflatten_point(q, t.dim, t.n_q, idx);
    double w = 1.0;
    for (int a = 0; a < t.dim; ++a) w *= rule.weights[idx[a]];
    t.weight[q] = w;
  }
  t.face_weight.resize(t.face_points);
  for (int p = 0; p < t.face_points; ++p) {
    int idx[max_lowdim];
    unflatten_point(p, t.dim - 1, t.n_q, idx);
    double w = 1.0;
    for (int a = 0; a < t.dim - 1; ++a) w *= rule.weights[idx[a]];
    t.face_weight[p] = w;
  }

  t.jinv.resize(static_cast<std::size_t>(t.cells_stored) * t.cell_points * dd);
  t.det.resize(static_cast<std::size_t>(t.cells_stored) * t.cell_points);
  t.face_jinv.resize(static_cast<std::size_t>(t.cells_stored) * nf * t.face_points * dd);
  t.face_det.resize(static_cast<std::size_t>(t.cells_stored) * nf * t.face_points);

  for (index_t c = 0; c < t.cells_stored; ++c) {
    for (int q = 0; q < t.cell_points; ++q) {
      int idx[max_lowdim];
      unflatten_point(q, t.dim, t.n_q, idx);
      double xi[max_lowdim];
      for (int a = 0; a < t.dim; ++a) xi[a] = rule.points[idx[a]];
      const PointGeometry g = mesh.geometry(c, std::span<const double>(xi, t.dim));
      if (!(g.det > 0.0)) throw std::domain_error("non-positive Jacobian determinant");
      adjugate_inverse(t.dim, g, t.jinv.data() + (static_cast<std::size_t>(c) * t.cell_points + q) * dd);
      t.det[static_cast<std::size_t>(c) * t.cell_points + q] = g.det;
    }
    for (int f = 0; f < nf; f += 2)
      for (int p = 0; p < t.face_points; ++p) {
        double xi[max_lowdim];
        face_point_coords(t.dim, t.n_q, f, p, rule.points, xi);
        const PointGeometry g = mesh.geometry(c, std::span<const double>(xi, t.dim));
        if (!(g.det > 0.0)) throw std::domain_error("non-positive Jacobian determinant");
        const std::size_t slot = (static_cast<std::size_t>(c) * nf + f) * t.face_points + p;
        adjugate_inverse(t.dim, g, t.face_jinv.data() + slot * dd);
        t.face_det[slot] = g.det;
      }
  }
  // high faces share the neighbour's low-face data so both sides see identical geometry
  for (index_t c = 0; c < t.cells_stored; ++c)
    for (int f = 1; f < nf; f += 2) {
      const index_t nb = single_set ? c : mesh.neighbor(c, f);
      const std::size_t from = (static_cast<std::size_t>(nb) * nf + f - 1) * t.face_points;
      const std::size_t to = (static_cast<std::size_t>(c) * nf + f) * t.face_points;
      std::copy_n(t.face_det.data() + from, t.face_points, t.face_det.data() + to);
      std::copy_n(t.face_jinv.data() + from * dd, t.face_points * dd, t.face_jinv.data() + to * dd);
    }
  return t;
}

MappingTables::MappingTables(const TensorTopology& topo, const Basis1D& basis, MappingStorage storage)
    : storage_(storage),
      dx_(topo.dim_x()),
      dv_(topo.dim_v()),
      n_q_(basis.n_q()),
      n_cx_(topo.mesh_x().cell_count()),
      weight_1d_(basis.quadrature.weights) {
  const bool single = storage == MappingStorage::cartesian_single_set;
  if (single && (!topo.mesh_x().is_cartesian() || !topo.mesh_v().is_cartesian()))
    throw std::invalid_argument("cartesian_single_set storage requires undeformed meshes");
  x_ = build_geometry_table(topo.mesh_x(), basis.quadrature, single);
  v_ = build_geometry_table(topo.mesh_v(), basis.quadrature, single);
  if (storage != MappingStorage::full_highdim) return;

  const int d = dx_ + dv_;
  const index_t n_cells = topo.n_cells();
  if (dof_count(n_cells, basis.k, d) > 200000)
    throw std::invalid_argument("full_highdim mapping storage is limited to small meshes");
  cell_points_ = x_.cell_points * v_.cell_points;
  face_points_ = cell_points_ / n_q_;
  full_jinv_.resize(static_cast<std::size_t>(n_cells) * cell_points_ * d * d);
  full_det_.resize(static_cast<std::size_t>(n_cells) * cell_points_);
  full_normal_.resize(static_cast<std::size_t>(n_cells) * 2 * d * face_points_ * d);

  const auto& pts = basis.quadrature.points;
  auto full_at = [&](CellPair c, const double* xi, double* jinv_out) {
    const PointGeometry gx = topo.mesh_x().geometry(c.cx, std::span<const double>(xi, dx_));
    const PointGeometry gv = topo.mesh_v().geometry(c.cv, std::span<const double>(xi + dx_, dv_));
    double J[max_dim * max_dim] = {};
    for (int r = 0; r < dx_; ++r)
      for (int s = 0; s < dx_; ++s) J[r * d + s] = gx.jacobian[r][s];
    for (int r = 0; r < dv_; ++r)
      for (int s = 0; s < dv_; ++s) J[(dx_ + r) * d + dx_ + s] = gv.jacobian[r][s];
    return invert_small(d, J, jinv_out);
  };

  for (index_t g = 0; g < n_cells; ++g) {
    const CellPair c = topo.cell_pair(g);
    for (int q = 0; q < cell_points_; ++q) {
      int idx[max_dim];
      unflatten_point(q, d, n_q_, idx);
      double xi[max_dim];
      for (int a = 0; a < d; ++a) xi[a] = pts[idx[a]];
      const std::size_t slot = static_cast<std::size_t>(g) * cell_points_ + q;
      full_det_[slot] = full_at(c, xi, full_jinv_.data() + slot * d * d);
    }
    for (int f = 0; f < 2 * d; f += 2) {
      const int axis = f / 2;
      const double sign = -1.0;
      for (int p = 0; p < face_points_; ++p) {
        double xi[max_dim];
        face_point_coords(d, n_q_, f, p, pts, xi);
        double jinv[max_dim * max_dim];
        const double det = full_at(c, xi, jinv);
        double* n = full_normal_.data() + ((static_cast<std::size_t>(g) * 2 * d + f) * face_points_ + p) * d;
        for (int m = 0; m < d; ++m) n[m] = sign * det * jinv[axis * d + m];
      }
    }
  }
  for (index_t g = 0; g < n_cells; ++g)
    for (int f = 1; f < 2 * d; f += 2) {
      const index_t nb = topo.global_index(topo.neighbor(topo.cell_pair(g), f));
      const double* from = full_normal_.data() + (static_cast<std::size_t>(nb) * 2 * d + f - 1) * face_points_ * d;
      double* to = full_normal_.data() + (static_cast<std::size_t>(g) * 2 * d + f) * face_points_ * d;
      for (int i = 0; i < face_points_ * d; ++i) to[i] = -from[i];
    }
}

double MappingTables::combine_jacobian(CellPair c, int q_x, int q_v, std::span<const double> a,
                                       std::span<double> out) const {
  const int d = dx_ + dv_;
  if (storage_ == MappingStorage::full_highdim) {
    const index_t g = c.cv * n_cx_ + c.cx;
    const int q = q_x + x_.cell_points * q_v;
    const double* ji = full_jinv(g, q);
    for (int r = 0; r < d; ++r) {
      double s = 0.0;
      for (int m = 0; m < d; ++m) s += ji[r * d + m] * a[m];
      out[r] = s;
    }
    return full_det(g, q) * x_.weight[q_x] * v_.weight[q_v];
  }
  const index_t sx = x_slot(c.cx), sv = v_slot(c.cv);
  const double* jx = x_.cell_jinv(sx, q_x);
  const double* jv = v_.cell_jinv(sv, q_v);
  for (int r = 0; r < dx_; ++r) {
    double s = 0.0;
    for (int m = 0; m < dx_; ++m) s += jx[r * dx_ + m] * a[m];
    out[r] = s;
  }
  for (int r = 0; r < dv_; ++r) {
    double s = 0.0;
    for (int m = 0; m < dv_; ++m) s += jv[r * dv_ + m] * a[dx_ + m];
    out[dx_ + r] = s;
  }
  return x_.cell_det(sx, q_x) * v_.cell_det(sv, q_v) * x_.weight[q_x] * v_.weight[q_v];
}

const double* MappingTables::full_jinv(index_t global_cell, int q) const {
  if (storage_ != MappingStorage::full_highdim) throw std::logic_error("full tables not stored");
  const int d = dx_ + dv_;
  return full_jinv_.data() + (static_cast<std::size_t>(global_cell) * cell_points_ + q) * d * d;
}

double MappingTables::full_det(index_t global_cell, int q) const {
  if (storage_ != MappingStorage::full_highdim) throw std::logic_error("full tables not stored");
  return full_det_[static_cast<std::size_t>(global_cell) * cell_points_ + q];
}

const double* MappingTables::full_face_normal(index_t global_cell, int face, int p) const {
  if (storage_ != MappingStorage::full_highdim) throw std::logic_error("full tables not stored");
  const int d = dx_ + dv_;
  return full_normal_.data() + ((static_cast<std::size_t>(global_cell) * 2 * d + face) * face_points_ + p) * d;
}

std::size_t MappingTables::cell_jacobian_doubles() const {
  if (storage_ == MappingStorage::full_highdim) return full_jinv_.size();
  return x_.jinv.size() + v_.jinv.size();
}

double mapping_memory_per_dof(int k, int dim_x, int dim_v, MappingStorage storage) {
  const int d = dim_x + dim_v;
  const double n = k + 1.0;
  switch (storage) {
    case MappingStorage::full_highdim: return static_cast<double>(d) * d;
    case MappingStorage::tensor_per_space:
      return (std::pow(n, dim_x) * dim_x * dim_x + std::pow(n, dim_v) * dim_v * dim_v) / std::pow(n, d);
    case MappingStorage::cartesian_single_set: return 0.0;
  }
  return 0.0;
}

}  // namespace hyperdg
