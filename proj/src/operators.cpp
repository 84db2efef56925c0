#include "hyperdg/operators.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "hyperdg/kernels.hpp"

namespace hyperdg {

namespace detail {

// Products of the inverse Jacobian, determinant and weights of one
// low-dimensional space, per stored cell slot.
struct LowDimFactors {
  int dim = 0, other = 0, nq = 0, nf = 0;
  index_t slots = 0;
  std::vector<double> P;    // [slot][r][m][q]  Jinv_rm |J| w
  std::vector<double> F;    // [slot][face][m][p]  +-Jinv_(axis)m |J| w_tangential
  std::vector<double> JW;   // [slot][q]
  std::vector<double> IJW;  // [slot][q]
  std::vector<double> A;    // [cell][m][q]  field component of the other space times |J| w

  const double* p(index_t s, int r, int m) const { return P.data() + ((s * dim + r) * dim + m) * nq; }
  const double* f(index_t s, int face, int m) const {
    return F.data() + ((s * 2 * dim + face) * dim + m) * nf;
  }
  const double* jw(index_t s) const { return JW.data() + s * nq; }
  const double* ijw(index_t s) const { return IJW.data() + s * nq; }
  const double* a(index_t cell, int m) const { return A.data() + (cell * other + m) * nq; }
};

struct OperatorWorkspace {
  int V = 1;
  std::array<index_t, 8> cells{};
  std::array<index_t, 8> cx{};
  index_t cv = 0;
  index_t v_slot = 0;
  std::vector<double> u, fq_buf, t, y, out, scratch;
  std::vector<double> fm, fp, fpn, s;
  std::vector<double> px, fxb, ix, qx;
  const double* pv = nullptr;
  const double* fv = nullptr;
  const double* iv = nullptr;
  const double* qv = nullptr;
  std::vector<double> cb, sb, db;
  const double* fq = nullptr;
  const double* result = nullptr;
};

}  // namespace detail

namespace {

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::unique_ptr<detail::LowDimFactors> make_factors(const LowDimGeometryTable& g, int other) {
  auto F = std::make_unique<detail::LowDimFactors>();
  F->dim = g.dim;
  F->other = other;
  F->nq = g.cell_points;
  F->nf = g.face_points;
  F->slots = g.cells_stored;
  const int dim = g.dim;
  F->P.resize(static_cast<std::size_t>(F->slots) * dim * dim * F->nq);
  F->F.resize(static_cast<std::size_t>(F->slots) * 2 * dim * dim * F->nf);
  F->JW.resize(static_cast<std::size_t>(F->slots) * F->nq);
  F->IJW.resize(F->JW.size());
  for (index_t s = 0; s < F->slots; ++s) {
    for (int q = 0; q < F->nq; ++q) {
      const double jw = g.cell_det(s, q) * g.weight[q];
      F->JW[s * F->nq + q] = jw;
      F->IJW[s * F->nq + q] = 1.0 / jw;
      const double* ji = g.cell_jinv(s, q);
      for (int r = 0; r < dim; ++r)
        for (int m = 0; m < dim; ++m) F->P[((s * dim + r) * dim + m) * F->nq + q] = ji[r * dim + m] * jw;
    }
    for (int f = 0; f < 2 * dim; ++f) {
      const double sign = f % 2 == 0 ? -1.0 : 1.0;
      const int axis = f / 2;
      for (int p = 0; p < F->nf; ++p) {
        const double* ji = g.face_jinv_at(s, f, p);
        const double scale = sign * g.face_det_at(s, f, p) * g.face_weight[p];
        for (int m = 0; m < dim; ++m)
          F->F[((s * 2 * dim + f) * dim + m) * F->nf + p] = ji[axis * dim + m] * scale;
      }
    }
  }
  return F;
}

double flux_flops(FluxKind k) { return k == FluxKind::upwind ? 7.0 : 3.0; }

}  // namespace

std::string to_string(FluxKind f) { return f == FluxKind::central ? "central" : "upwind"; }

FluxKind parse_flux_kind(const std::string& s) {
  if (s == "central") return FluxKind::central;
  if (s == "upwind") return FluxKind::upwind;
  throw std::invalid_argument("unknown flux '" + s + "'");
}

std::string to_string(LoopStrategy s) { return s == LoopStrategy::ecl ? "ecl" : "fcl"; }

LoopStrategy parse_loop_strategy(const std::string& s) {
  if (s == "ecl") return LoopStrategy::ecl;
  if (s == "fcl") return LoopStrategy::fcl;
  throw std::invalid_argument("unknown loop strategy '" + s + "'");
}

FieldTable::FieldTable(const PartitionLayout& layout, int dim_x, int points_per_cell)
    : dim_x_(dim_x), points_(points_per_cell) {
  const int p = layout.n_ranks();
  ranges_.resize(p);
  data_.resize(p);
  for (int r = 0; r < p; ++r) {
    ranges_[r] = layout.x_owned(layout.col_index(r));
    data_[r].assign(static_cast<std::size_t>(ranges_[r].size()) * points_ * dim_x_, 0.0);
  }
  for (int i = 0; i < layout.p_x(); ++i) {
    const CellRange& xr = layout.x_owned(i);
    for (index_t cx = xr.begin; cx < xr.end; ++cx) {
      if (static_cast<index_t>(holder_.size()) <= cx) holder_.resize(cx + 1);
      holder_[cx] = layout.rank_of(i, 0);
    }
  }
}

double FieldTable::value(index_t cx, int q, int m) const {
  const int r = holder_.at(cx);
  return cell(r, cx)[q * dim_x_ + m];
}

AdvectionField AdvectionField::constant(std::vector<double> a) {
  AdvectionField f;
  f.kind = Kind::constant;
  f.a = std::move(a);
  return f;
}

AdvectionField AdvectionField::phase_space(std::shared_ptr<const FieldTable> e) {
  AdvectionField f;
  f.kind = Kind::phase_space;
  f.electric = std::move(e);
  return f;
}

AdvectionOperator::AdvectionOperator(std::shared_ptr<const Partitioner> partitioner, QuadratureKind quadrature,
                                     OperatorOptions options, AdvectionField field)
    : part_(std::move(partitioner)),
      basis_(build_basis(part_->k(), quadrature)),
      opt_(options),
      field_(std::move(field)),
      mapping_(part_->topology(), basis_, options.storage) {
  if (!valid_v_len(opt_.v_len)) throw std::invalid_argument("v_len must be 1, 2, 4 or 8");
  if (opt_.threads < 1) throw std::invalid_argument("thread count must be positive");
  const TensorTopology& topo = part_->topology();
  dx_ = topo.dim_x();
  dv_ = topo.dim_v();
  d_ = dx_ + dv_;
  n_ = basis_.n_q();
  nd_ = ipow(n_, d_);
  nqx_ = ipow(n_, dx_);
  nqv_ = ipow(n_, dv_);
  nfd_ = ipow(n_, d_ - 1);
  curved_ = !topo.mesh_x().is_cartesian() || !topo.mesh_v().is_cartesian();

  x_points_.resize(static_cast<std::size_t>(topo.mesh_x().cell_count()) * nqx_ * dx_);
  v_points_.resize(static_cast<std::size_t>(topo.mesh_v().cell_count()) * nqv_ * dv_);
  auto fill_points = [&](const LowDimMesh& mesh, int nq, std::vector<double>& out) {
    const int dim = mesh.dim();
    for (index_t c = 0; c < mesh.cell_count(); ++c)
      for (int q = 0; q < nq; ++q) {
        int idx[max_lowdim];
        unflatten_point(q, dim, n_, idx);
        double xi[max_lowdim];
        for (int a = 0; a < dim; ++a) xi[a] = basis_.quadrature.points[idx[a]];
        const PointGeometry g = mesh.geometry(c, std::span<const double>(xi, dim));
        for (int a = 0; a < dim; ++a) out[(c * nq + q) * dim + a] = g.x[a];
      }
  };
  fill_points(topo.mesh_x(), nqx_, x_points_);
  fill_points(topo.mesh_v(), nqv_, v_points_);

  fx_ = make_factors(mapping_.x(), dv_);
  fv_ = make_factors(mapping_.v(), dx_);
  x_terms_.resize(dx_);
  v_terms_.resize(dv_);
  for (int r = 0; r < dx_; ++r)
    for (int m = 0; m < dx_; ++m)
      if (m == r || !topo.mesh_x().is_cartesian()) x_terms_[r].push_back(m);
  for (int r = 0; r < dv_; ++r)
    for (int m = 0; m < dv_; ++m)
      if (m == r || !topo.mesh_v().is_cartesian()) v_terms_[r].push_back(m);

  build_field_factors();
  workspaces_.resize(static_cast<std::size_t>(part_->n_ranks()) * opt_.threads);
  fcl_accum_.resize(part_->n_ranks());
  fcl_flux_.resize(part_->n_ranks());
}

AdvectionOperator::~AdvectionOperator() = default;

void AdvectionOperator::set_field(AdvectionField field) {
  field_ = std::move(field);
  build_field_factors();
}

void AdvectionOperator::build_field_factors() {
  const TensorTopology& topo = part_->topology();
  if (field_.kind == AdvectionField::Kind::constant) {
    if (static_cast<int>(field_.a.size()) != d_)
      throw std::invalid_argument("constant advection field needs d components");
  } else {
    if (dx_ != dv_) throw std::invalid_argument("the Vlasov field requires d_x == d_v");
    if (opt_.storage == MappingStorage::full_highdim)
      throw std::invalid_argument("full_highdim storage supports constant fields only");
    if (field_.electric && (field_.electric->dim_x() != dx_ || field_.electric->points_per_cell() != nqx_))
      throw std::invalid_argument("electric field table does not match the x-space quadrature");
  }
  const bool constant = field_.kind == AdvectionField::Kind::constant;
  // x side: factor of the v-directions (a_v |J_x| w_x); only constant fields are tabulated
  fx_->A.clear();
  if (constant) {
    const index_t ncx = topo.mesh_x().cell_count();
    fx_->A.resize(static_cast<std::size_t>(ncx) * dv_ * nqx_);
    for (index_t cx = 0; cx < ncx; ++cx)
      for (int m = 0; m < dv_; ++m)
        for (int q = 0; q < nqx_; ++q)
          fx_->A[(cx * dv_ + m) * nqx_ + q] = field_.a[dx_ + m] * fx_->jw(mapping_.x_slot(cx))[q];
  }
  // v side: factor of the x-directions (a_x |J_v| w_v), a_x = const or v
  const index_t ncv = topo.mesh_v().cell_count();
  fv_->A.resize(static_cast<std::size_t>(ncv) * dx_ * nqv_);
  for (index_t cv = 0; cv < ncv; ++cv)
    for (int m = 0; m < dx_; ++m)
      for (int q = 0; q < nqv_; ++q) {
        const double am = constant ? field_.a[m] : v_point(cv, q)[m];
        fv_->A[(cv * dx_ + m) * nqv_ + q] = am * fv_->jw(mapping_.v_slot(cv))[q];
      }
}

std::size_t AdvectionOperator::workspace_doubles() const {
  const std::size_t V = opt_.v_len;
  return 6 * nd_ * V + 4 * nfd_ * V;
}

AdvectionOperator::Workspace& AdvectionOperator::workspace(int rank, int thread) const {
  auto& slot = workspaces_[static_cast<std::size_t>(rank) * opt_.threads + thread];
  if (!slot) {
    slot = std::make_unique<Workspace>();
    const std::size_t V = opt_.v_len;
    const std::size_t cell = nd_ * V, face = nfd_ * V;
    for (auto* b : {&slot->u, &slot->fq_buf, &slot->t, &slot->y, &slot->out, &slot->scratch}) b->assign(cell, 0.0);
    for (auto* b : {&slot->fm, &slot->fp, &slot->fpn, &slot->s}) b->assign(face, 0.0);
    const int nfx = ipow(n_, dx_ - 1);
    slot->px.assign(static_cast<std::size_t>(dx_) * dx_ * nqx_ * V, 0.0);
    slot->fxb.assign(static_cast<std::size_t>(2 * dx_) * dx_ * nfx * V, 0.0);
    slot->ix.assign(nqx_ * V, 0.0);
    slot->qx.assign(static_cast<std::size_t>(dv_) * nqx_ * V, 0.0);
    if (opt_.storage == MappingStorage::full_highdim) {
      slot->cb.assign(static_cast<std::size_t>(d_) * cell, 0.0);
      slot->sb.assign(static_cast<std::size_t>(2 * d_) * face, 0.0);
      slot->db.assign(cell, 0.0);
    }
  }
  return *slot;
}

index_t AdvectionOperator::n_batches(int rank) const {
  const PartitionLayout& L = part_->layout();
  const index_t nxr = L.x_owned(L.col_index(rank)).size();
  const index_t nvr = L.v_owned(L.row_index(rank)).size();
  const index_t bpr = (nxr + opt_.v_len - 1) / opt_.v_len;
  return nvr * bpr;
}

int AdvectionOperator::batch_cells(int rank, index_t batch, Workspace& ws) const {
  const PartitionLayout& L = part_->layout();
  const index_t nxr = L.x_owned(L.col_index(rank)).size();
  const index_t bpr = (nxr + ws.V - 1) / ws.V;
  const index_t row = batch / bpr, chunk = batch % bpr;
  const index_t first = row * nxr + chunk * ws.V;
  const int lanes = static_cast<int>(std::min<index_t>(ws.V, nxr - chunk * ws.V));
  for (int l = 0; l < ws.V; ++l) ws.cells[l] = first + std::min(l, lanes - 1);
  return lanes;
}

void AdvectionOperator::for_each_batch(int rank,
                                       const std::function<void(Workspace&, OpCounters&, index_t)>& body,
                                       OpCounters& c) const {
  const index_t nb = n_batches(rank);
  const int T = static_cast<int>(std::max<index_t>(1, std::min<index_t>(opt_.threads, nb)));
  if (T == 1) {
    Workspace& ws = workspace(rank, 0);
    for (index_t b = 0; b < nb; ++b) body(ws, c, b);
    return;
  }
  std::vector<OpCounters> tc(T);
  std::vector<std::exception_ptr> errors(T);
  std::vector<std::thread> threads;
  for (int t = 0; t < T; ++t) {
    Workspace& ws = workspace(rank, t);
    threads.emplace_back([&, t] {
      try {
        const index_t b0 = nb * t / T, b1 = nb * (t + 1) / T;
        for (index_t b = b0; b < b1; ++b) body(ws, tc[t], b);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& x : tc) c += x;
}

void AdvectionOperator::load_factors(int rank, Workspace& ws, int lanes, OpCounters& c) const {
  const int V = ws.V;
  const PartitionLayout& L = part_->layout();
  for (int l = 0; l < V; ++l) {
    const CellPair cp = L.owned_cell(rank, ws.cells[l]);
    ws.cx[l] = cp.cx;
    ws.cv = cp.cv;
  }
  ws.v_slot = mapping_.v_slot(ws.cv);

  if (opt_.storage == MappingStorage::full_highdim) {
    const auto& wx = mapping_.x().weight;
    const auto& wv = mapping_.v().weight;
    const int nfx = ipow(n_, dx_ - 1);
    const TensorTopology& topo = part_->topology();
    for (int l = 0; l < V; ++l) {
      const index_t g = topo.global_index({ws.cx[l], ws.cv});
      for (int q = 0; q < nd_; ++q) {
        const double w = wx[q % nqx_] * wv[q / nqx_];
        const double det = mapping_.full_det(g, q);
        const double* ji = mapping_.full_jinv(g, q);
        for (int j = 0; j < d_; ++j) {
          double s = 0.0;
          for (int m = 0; m < d_; ++m) s += ji[j * d_ + m] * field_.a[m];
          ws.cb[(static_cast<std::size_t>(j) * nd_ + q) * V + l] = s * det * w;
        }
        ws.db[static_cast<std::size_t>(q) * V + l] = 1.0 / (det * w);
      }
      for (int f = 0; f < 2 * d_; ++f)
        for (int p = 0; p < nfd_; ++p) {
          const double* N = mapping_.full_face_normal(g, f, p);
          double an = 0.0;
          for (int m = 0; m < d_; ++m) an += N[m] * field_.a[m];
          const double w = f < 2 * dx_ ? mapping_.x().face_weight[p % nfx] * wv[p / nfx]
                                       : wx[p % nqx_] * mapping_.v().face_weight[p / nqx_];
          ws.sb[(static_cast<std::size_t>(f) * nfd_ + p) * V + l] = an * w;
        }
    }
    c.modeled_doubles_moved += static_cast<std::uint64_t>(lanes) * nd_ * (d_ * d_ + 1);
    return;
  }

  const int nfx = ipow(n_, dx_ - 1);
  const bool constant = field_.kind == AdvectionField::Kind::constant;
  for (int l = 0; l < V; ++l) {
    const index_t s = mapping_.x_slot(ws.cx[l]);
    for (int r = 0; r < dx_; ++r)
      for (int m : x_terms_[r]) {
        const double* src = fx_->p(s, r, m);
        double* dst = ws.px.data() + static_cast<std::size_t>(r * dx_ + m) * nqx_ * V;
        for (int q = 0; q < nqx_; ++q) dst[q * V + l] = src[q];
      }
    for (int f = 0; f < 2 * dx_; ++f)
      for (int m : x_terms_[f / 2]) {
        const double* src = fx_->f(s, f, m);
        double* dst = ws.fxb.data() + static_cast<std::size_t>(f * dx_ + m) * nfx * V;
        for (int p = 0; p < nfx; ++p) dst[p * V + l] = src[p];
      }
    const double* ijw = fx_->ijw(s);
    for (int q = 0; q < nqx_; ++q) ws.ix[q * V + l] = ijw[q];
    for (int m = 0; m < dv_; ++m) {
      double* dst = ws.qx.data() + static_cast<std::size_t>(m) * nqx_ * V;
      if (constant) {
        const double* src = fx_->a(ws.cx[l], m);
        for (int q = 0; q < nqx_; ++q) dst[q * V + l] = src[q];
      } else if (field_.electric) {
        const double* e = field_.electric->cell(rank, ws.cx[l]);
        const double* jw = fx_->jw(s);
        for (int q = 0; q < nqx_; ++q) dst[q * V + l] = -e[q * dx_ + m] * jw[q];
      } else {
        for (int q = 0; q < nqx_; ++q) dst[q * V + l] = 0.0;
      }
    }
  }
  ws.pv = fv_->p(ws.v_slot, 0, 0);
  ws.fv = fv_->f(ws.v_slot, 0, 0);
  ws.iv = fv_->ijw(ws.v_slot);
  ws.qv = fv_->a(ws.cv, 0);
  if (curved_)
    c.modeled_doubles_moved += static_cast<std::uint64_t>(lanes) * nqx_ * (dx_ * dx_ + 1) +
                               static_cast<std::uint64_t>(nqv_) * (dv_ * dv_ + 1);
  if (!constant) {
    c.field_lookups += static_cast<std::uint64_t>(lanes) * nd_;
    c.modeled_doubles_moved += static_cast<std::uint64_t>(lanes) * nqx_ * dx_;
  }
}

void AdvectionOperator::gather_cells(int rank, const PhaseVector& src, Workspace& ws, int lanes,
                                     OpCounters& c) const {
  const int V = ws.V;
  for (int l = 0; l < V; ++l) {
    const double* s = src.cell(rank, ws.cells[l]);
    for (int i = 0; i < nd_; ++i) ws.u[static_cast<std::size_t>(i) * V + l] = s[i];
    if (observer_ && l < lanes)
      for (int i = 0; i < nd_; ++i) observer_(s + i);
  }
  c.modeled_doubles_moved += static_cast<std::uint64_t>(nd_) * lanes;
  const std::size_t len = static_cast<std::size_t>(nd_) * V;
  if (basis_.collocation) {
    ws.fq = ws.u.data();
  } else {
    interpolate_to_quadrature(basis_, d_, V, {ws.u.data(), len}, {ws.fq_buf.data(), len},
                              {ws.scratch.data(), len}, c);
    ws.fq = ws.fq_buf.data();
  }
}

void AdvectionOperator::direction_coefficients(const Workspace& ws, int j, const double* fq, double* t,
                                               OpCounters& c) const {
  const int V = ws.V;
  if (opt_.storage == MappingStorage::full_highdim) {
    const double* cb = ws.cb.data() + static_cast<std::size_t>(j) * nd_ * V;
    for (std::size_t i = 0; i < static_cast<std::size_t>(nd_) * V; ++i) t[i] = fq[i] * cb[i];
    c.flops += static_cast<std::uint64_t>(nd_) * V;
    c.data_sweeps += 2;
    return;
  }
  if (j < dx_) {
    const auto& terms = x_terms_[j];
    for (int qv = 0; qv < nqv_; ++qv)
      for (int qx = 0; qx < nqx_; ++qx) {
        const std::size_t base = (static_cast<std::size_t>(qv) * nqx_ + qx) * V;
        for (int l = 0; l < V; ++l) {
          double sum = 0.0;
          for (int m : terms)
            sum += ws.px[(static_cast<std::size_t>(j * dx_ + m) * nqx_ + qx) * V + l] * ws.qv[m * nqv_ + qv];
          t[base + l] = fq[base + l] * sum;
        }
      }
    c.flops += static_cast<std::uint64_t>(nd_) * V * 2 * terms.size();
  } else {
    const int r = j - dx_;
    const auto& terms = v_terms_[r];
    for (int qv = 0; qv < nqv_; ++qv)
      for (int qx = 0; qx < nqx_; ++qx) {
        const std::size_t base = (static_cast<std::size_t>(qv) * nqx_ + qx) * V;
        for (int l = 0; l < V; ++l) {
          double sum = 0.0;
          for (int m : terms)
            sum += ws.pv[(r * dv_ + m) * nqv_ + qv] * ws.qx[(static_cast<std::size_t>(m) * nqx_ + qx) * V + l];
          t[base + l] = fq[base + l] * sum;
        }
      }
    c.flops += static_cast<std::uint64_t>(nd_) * V * 2 * terms.size();
  }
  c.data_sweeps += 2;
}

void AdvectionOperator::face_speed(const Workspace& ws, int face, double* s, OpCounters& c) const {
  const int V = ws.V;
  if (opt_.storage == MappingStorage::full_highdim) {
    const double* sb = ws.sb.data() + static_cast<std::size_t>(face) * nfd_ * V;
    std::copy_n(sb, static_cast<std::size_t>(nfd_) * V, s);
    return;
  }
  if (face < 2 * dx_) {
    const int r = face / 2;
    const int nfx = nfd_ / nqv_;
    const auto& terms = x_terms_[r];
    for (int qv = 0; qv < nqv_; ++qv)
      for (int p = 0; p < nfx; ++p) {
        const std::size_t base = (static_cast<std::size_t>(qv) * nfx + p) * V;
        for (int l = 0; l < V; ++l) {
          double sum = 0.0;
          for (int m : terms)
            sum += ws.fxb[(static_cast<std::size_t>(face * dx_ + m) * nfx + p) * V + l] * ws.qv[m * nqv_ + qv];
          s[base + l] = sum;
        }
      }
    c.flops += static_cast<std::uint64_t>(nfd_) * V * (2 * terms.size() - 1);
  } else {
    const int fv = face - 2 * dx_;
    const int r = fv / 2;
    const int nfv = nfd_ / nqx_;
    const auto& terms = v_terms_[r];
    for (int p = 0; p < nfv; ++p)
      for (int qx = 0; qx < nqx_; ++qx) {
        const std::size_t base = (static_cast<std::size_t>(p) * nqx_ + qx) * V;
        for (int l = 0; l < V; ++l) {
          double sum = 0.0;
          for (int m : terms)
            sum += ws.fv[(fv * dv_ + m) * nfv + p] * ws.qx[(static_cast<std::size_t>(m) * nqx_ + qx) * V + l];
          s[base + l] = sum;
        }
      }
    c.flops += static_cast<std::uint64_t>(nfd_) * V * (2 * terms.size() - 1);
  }
}

void AdvectionOperator::inverse_mass_diag(const Workspace& ws, double* y, OpCounters& c) const {
  const int V = ws.V;
  if (opt_.storage == MappingStorage::full_highdim) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(nd_) * V; ++i) y[i] *= ws.db[i];
    c.flops += static_cast<std::uint64_t>(nd_) * V;
  } else {
    for (int qv = 0; qv < nqv_; ++qv)
      for (int qx = 0; qx < nqx_; ++qx) {
        const std::size_t base = (static_cast<std::size_t>(qv) * nqx_ + qx) * V;
        for (int l = 0; l < V; ++l) y[base + l] *= ws.ix[qx * V + l] * ws.iv[qv];
      }
    c.flops += static_cast<std::uint64_t>(nd_) * V * 2;
  }
  c.data_sweeps += 2;
}

void AdvectionOperator::cell_terms(Workspace& ws, OpCounters& c) const {
  const int V = ws.V;
  const std::size_t len = static_cast<std::size_t>(nd_) * V;
  const TensorShape shape = TensorShape::uniform(d_, n_);
  // x-space directions first, then v-space
  for (int j = 0; j < d_; ++j) {
    direction_coefficients(ws, j, ws.fq, ws.t.data(), c);
    contract_dim(basis_.derivative_t, j, shape, V, {ws.t.data(), len}, {ws.y.data(), len}, c, j > 0);
  }
}

void AdvectionOperator::ecl_faces(int rank, const PhaseVector& src, Workspace& ws, int lanes,
                                  OpCounters& c) const {
  const int V = ws.V;
  const std::size_t len = static_cast<std::size_t>(nd_) * V;
  const std::size_t flen = static_cast<std::size_t>(nfd_) * V;
  const TensorShape shape = TensorShape::uniform(d_, n_);
  const Partitioner& P = *part_;
  for (int f = 0; f < 2 * d_; ++f) {
    const int axis = f / 2, side = f % 2;
    // both traces start from nodal face values, so the two sides of a face agree bitwise
    const auto& own = P.face_indices(f);
    double* o = basis_.collocation ? ws.fm.data() : ws.fpn.data();
    for (int i = 0; i < nfd_; ++i)
      for (int l = 0; l < V; ++l) o[static_cast<std::size_t>(i) * V + l] = ws.u[static_cast<std::size_t>(own[i]) * V + l];
    if (!basis_.collocation)
      apply_all_dims(basis_.interp, d_ - 1, n_, V, {ws.fpn.data(), flen}, {ws.fm.data(), flen},
                     {ws.scratch.data(), flen}, c);
    const auto& idx = P.face_indices(f ^ 1);
    for (int l = 0; l < V; ++l) {
      const PhaseVector::FaceSource fs = src.face_source(rank, ws.cells[l], f);
      if (fs.full_cell) {
        for (int i = 0; i < nfd_; ++i) ws.fpn[static_cast<std::size_t>(i) * V + l] = fs.data[idx[i]];
        if (observer_ && l < lanes)
          for (int i = 0; i < nfd_; ++i) observer_(fs.data + idx[i]);
      } else {
        for (int i = 0; i < nfd_; ++i) ws.fpn[static_cast<std::size_t>(i) * V + l] = fs.data[i];
        if (observer_ && l < lanes)
          for (int i = 0; i < nfd_; ++i) observer_(fs.data + i);
      }
    }
    c.modeled_doubles_moved += static_cast<std::uint64_t>(nfd_) * lanes;
    const double* up = ws.fpn.data();
    if (!basis_.collocation) {
      apply_all_dims(basis_.interp, d_ - 1, n_, V, {ws.fpn.data(), flen}, {ws.fp.data(), flen},
                     {ws.scratch.data(), flen}, c);
      up = ws.fp.data();
    }
    face_speed(ws, f, ws.s.data(), c);
    for (std::size_t i = 0; i < flen; ++i) ws.fm[i] = -numerical_flux(ws.fm[i], up[i], ws.s[i], opt_.flux);
    c.flops += static_cast<std::uint64_t>(flux_flops(opt_.flux)) * flen;
    c.flux_evals += lanes;
    contract_dim(basis_.face_eval_t[side], axis, shape.with_extent(axis, 1), V, {ws.fm.data(), flen},
                 {ws.y.data(), len}, c, true);
  }
}

void AdvectionOperator::finish(Workspace& ws, OpCounters& c) const {
  const int V = ws.V;
  const std::size_t len = static_cast<std::size_t>(nd_) * V;
  if (opt_.apply_inverse_mass) {
    inverse_mass_diag(ws, ws.y.data(), c);
    if (basis_.collocation) {
      ws.result = ws.y.data();
    } else {
      apply_all_dims(basis_.inverse_v, d_, n_, V, {ws.y.data(), len}, {ws.out.data(), len},
                     {ws.scratch.data(), len}, c);
      ws.result = ws.out.data();
    }
  } else if (basis_.collocation) {
    ws.result = ws.y.data();
  } else {
    apply_all_dims(basis_.interp_t, d_, n_, V, {ws.y.data(), len}, {ws.out.data(), len},
                   {ws.scratch.data(), len}, c);
    ws.result = ws.out.data();
  }
}

void AdvectionOperator::scatter(const Workspace& ws, int lanes, double* dst_base, OpCounters& c) const {
  const int V = ws.V;
  for (int l = 0; l < lanes; ++l) {
    double* d = dst_base + static_cast<std::size_t>(ws.cells[l]) * nd_;
    for (int i = 0; i < nd_; ++i) d[i] = ws.result[static_cast<std::size_t>(i) * V + l];
  }
  c.modeled_doubles_moved += static_cast<std::uint64_t>(nd_) * lanes;
  c.dofs_processed += static_cast<std::uint64_t>(nd_) * lanes;
}

void AdvectionOperator::apply(LoopStrategy loop, int rank, const PhaseVector& src, PhaseVector& dst,
                              OpCounters& c) const {
  if (loop == LoopStrategy::ecl)
    apply_ecl(rank, src, dst, c);
  else
    apply_fcl(rank, src, dst, c);
}

void AdvectionOperator::apply_ecl(int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const {
  if (&src == &dst) throw std::invalid_argument("advection apply cannot work in place");
  if (src.partitioner_ptr() != part_ || dst.partitioner_ptr() != part_)
    throw std::invalid_argument("vector belongs to a different partitioner");
  const auto t0 = std::chrono::steady_clock::now();
  double* base = dst.owned_mut(rank).data();
  for_each_batch(
      rank,
      [&](Workspace& ws, OpCounters& cc, index_t b) {
        ws.V = opt_.v_len;
        const int lanes = batch_cells(rank, b, ws);
        load_factors(rank, ws, lanes, cc);
        gather_cells(rank, src, ws, lanes, cc);
        if (opt_.cell_terms)
          cell_terms(ws, cc);
        else
          std::fill_n(ws.y.begin(), static_cast<std::size_t>(nd_) * ws.V, 0.0);
        if (opt_.face_terms) ecl_faces(rank, src, ws, lanes, cc);
        finish(ws, cc);
        scatter(ws, lanes, base, cc);
      },
      c);
  c.operator_applications += 1;
  c.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void AdvectionOperator::apply_fcl(int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const {
  if (&src == &dst) throw std::invalid_argument("advection apply cannot work in place");
  if (src.partitioner_ptr() != part_ || dst.partitioner_ptr() != part_)
    throw std::invalid_argument("vector belongs to a different partitioner");
  if (src.mode() != GhostMode::buffered || dst.mode() != GhostMode::buffered)
    throw ProtocolError("the face-centric loop requires buffered vectors");
  const auto t0 = std::chrono::steady_clock::now();
  const Partitioner& P = *part_;
  const index_t n_local = P.n_owned(rank);
  const std::size_t nd = nd_, flen = nfd_, faces = 2 * d_;
  auto& acc = fcl_accum_[rank];
  auto& flux = fcl_flux_[rank];
  acc.resize(n_local * nd);
  if (opt_.face_terms) flux.resize(n_local * faces * flen);
  double* base = dst.owned_mut(rank).data();
  Workspace& ws = workspace(rank, 0);
  const index_t nb = n_batches(rank);
  const TensorShape shape = TensorShape::uniform(d_, n_);

  // cell integrals, batched as in the element-centric loop
  for (index_t b = 0; b < nb; ++b) {
    ws.V = opt_.v_len;
    const std::size_t V = ws.V;
    const int lanes = batch_cells(rank, b, ws);
    load_factors(rank, ws, lanes, c);
    gather_cells(rank, src, ws, lanes, c);
    if (opt_.cell_terms)
      cell_terms(ws, c);
    else
      std::fill_n(ws.y.begin(), nd * V, 0.0);
    for (int l = 0; l < lanes; ++l) {
      double* a = acc.data() + ws.cells[l] * nd;
      for (std::size_t i = 0; i < nd; ++i) a[i] = ws.y[i * V + l];
    }
  }

  if (opt_.face_terms) {
    std::span<double> ghosts = dst.ghosts_mut(rank);
    ws.V = 1;
    for (index_t l = 0; l < n_local; ++l) {
      ws.cells[0] = l;
      load_factors(rank, ws, 1, c);
      for (int axis = 0; axis < d_; ++axis) {
        const int f = 2 * axis + 1;
        const auto& nb_idx = P.face_indices(f ^ 1);
        const PhaseVector::FaceSource fs = src.face_source(rank, l, f);
        const double* u = src.cell(rank, l);
        const auto& own_idx = P.face_indices(f);
        double* o = basis_.collocation ? ws.fm.data() : ws.fpn.data();
        for (std::size_t i = 0; i < flen; ++i) o[i] = u[own_idx[i]];
        if (!basis_.collocation)
          apply_all_dims(basis_.interp, d_ - 1, n_, 1, {ws.fpn.data(), flen}, {ws.fm.data(), flen},
                         {ws.scratch.data(), flen}, c);
        double* up = basis_.collocation ? ws.fp.data() : ws.fpn.data();
        for (std::size_t i = 0; i < flen; ++i) up[i] = fs.full_cell ? fs.data[nb_idx[i]] : fs.data[i];
        if (!basis_.collocation)
          apply_all_dims(basis_.interp, d_ - 1, n_, 1, {ws.fpn.data(), flen}, {ws.fp.data(), flen},
                         {ws.scratch.data(), flen}, c);
        c.modeled_doubles_moved += 2 * flen;
        face_speed(ws, f, ws.s.data(), c);
        const NeighborRef& ref = P.neighbor(rank, l, f);
        double* mine = flux.data() + (l * faces + f) * flen;
        double* theirs = ref.owner == rank ? flux.data() + (ref.owner_local * faces + (f ^ 1)) * flen
                                           : ghosts.data() + ref.buffered_slot * flen;
        for (std::size_t i = 0; i < flen; ++i) {
          const double F = numerical_flux(ws.fm[i], ws.fp[i], ws.s[i], opt_.flux);
          mine[i] = -F;
          theirs[i] = F;
        }
        c.flops += static_cast<std::uint64_t>(flux_flops(opt_.flux)) * flen;
        c.flux_evals += 1;
      }
    }
    dst.compress(
        rank,
        [&](index_t local, int face, std::span<const double> values) {
          // only low faces carry flux contributions; the other slots were never written
          if (face % 2 == 1) return;
          std::copy(values.begin(), values.end(), flux.data() + (local * faces + face) * flen);
        },
        &c);
  }

  // lift the face fluxes in the element-centric face order, then finish
  for (index_t b = 0; b < nb; ++b) {
    ws.V = opt_.v_len;
    const std::size_t V = ws.V;
    const int lanes = batch_cells(rank, b, ws);
    load_factors(rank, ws, lanes, c);
    for (std::size_t l = 0; l < V; ++l) {
      const double* a = acc.data() + ws.cells[l] * nd;
      for (std::size_t i = 0; i < nd; ++i) ws.y[i * V + l] = a[i];
    }
    if (opt_.face_terms)
      for (std::size_t f = 0; f < faces; ++f) {
        for (std::size_t l = 0; l < V; ++l) {
          const double* F = flux.data() + (ws.cells[l] * faces + f) * flen;
          for (std::size_t i = 0; i < flen; ++i) ws.fm[i * V + l] = F[i];
        }
        const int axis = static_cast<int>(f / 2);
        contract_dim(basis_.face_eval_t[f % 2], axis, shape.with_extent(axis, 1), ws.V, {ws.fm.data(), flen * V},
                     {ws.y.data(), nd * V}, c, true);
      }
    finish(ws, c);
    scatter(ws, lanes, base, c);
  }
  c.operator_applications += 1;
  c.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double AdvectionOperator::jxw(CellPair cp, int q) const {
  const int qx = q % nqx_, qv = q / nqx_;
  if (opt_.storage == MappingStorage::full_highdim) {
    const index_t g = part_->topology().global_index(cp);
    return mapping_.full_det(g, q) * mapping_.x().weight[qx] * mapping_.v().weight[qv];
  }
  return fx_->jw(mapping_.x_slot(cp.cx))[qx] * fv_->jw(mapping_.v_slot(cp.cv))[qv];
}

void AdvectionOperator::inverse_mass(int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const {
  const auto t0 = std::chrono::steady_clock::now();
  const PartitionLayout& L = part_->layout();
  Workspace& ws = workspace(rank, 0);
  const std::size_t len = nd_;
  const index_t n_local = part_->n_owned(rank);
  for (index_t l = 0; l < n_local; ++l) {
    const CellPair cp = L.owned_cell(rank, l);
    std::copy_n(src.cell(rank, l), len, ws.u.data());
    double* y = ws.u.data();
    if (!basis_.collocation) {
      apply_all_dims(basis_.inverse_v_t, d_, n_, 1, {ws.u.data(), len}, {ws.y.data(), len},
                     {ws.scratch.data(), len}, c);
      y = ws.y.data();
    }
    for (int q = 0; q < nd_; ++q) y[q] /= jxw(cp, q);
    c.flops += nd_;
    c.data_sweeps += 2;
    double* out = dst.owned_mut(rank).data() + static_cast<std::size_t>(l) * nd_;
    if (basis_.collocation) {
      std::copy_n(y, len, out);
    } else {
      apply_all_dims(basis_.inverse_v, d_, n_, 1, {y, len}, {ws.out.data(), len}, {ws.scratch.data(), len}, c);
      std::copy_n(ws.out.data(), len, out);
    }
    c.modeled_doubles_moved += 2 * len + (curved_ ? len : 0);
    c.dofs_processed += len;
  }
  c.operator_applications += 1;
  c.wall_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void AdvectionOperator::mass(int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const {
  const PartitionLayout& L = part_->layout();
  Workspace& ws = workspace(rank, 0);
  const std::size_t len = nd_;
  const index_t n_local = part_->n_owned(rank);
  for (index_t l = 0; l < n_local; ++l) {
    const CellPair cp = L.owned_cell(rank, l);
    std::copy_n(src.cell(rank, l), len, ws.u.data());
    double* y = ws.u.data();
    if (!basis_.collocation) {
      apply_all_dims(basis_.interp, d_, n_, 1, {ws.u.data(), len}, {ws.y.data(), len}, {ws.scratch.data(), len},
                     c);
      y = ws.y.data();
    }
    for (int q = 0; q < nd_; ++q) y[q] *= jxw(cp, q);
    c.flops += nd_;
    double* out = dst.owned_mut(rank).data() + static_cast<std::size_t>(l) * nd_;
    if (basis_.collocation) {
      std::copy_n(y, len, out);
    } else {
      apply_all_dims(basis_.interp_t, d_, n_, 1, {y, len}, {ws.out.data(), len}, {ws.scratch.data(), len}, c);
      std::copy_n(ws.out.data(), len, out);
    }
    c.dofs_processed += len;
  }
  c.operator_applications += 1;
}

double AdvectionOperator::integral(int rank, const PhaseVector& v) const {
  const PartitionLayout& L = part_->layout();
  Workspace& ws = workspace(rank, 0);
  OpCounters c;
  const std::size_t len = nd_;
  double sum = 0.0;
  const index_t n_local = part_->n_owned(rank);
  for (index_t l = 0; l < n_local; ++l) {
    const CellPair cp = L.owned_cell(rank, l);
    const double* q = v.cell(rank, l);
    if (!basis_.collocation) {
      interpolate_to_quadrature(basis_, d_, 1, {q, len}, {ws.y.data(), len}, {ws.scratch.data(), len}, c);
      q = ws.y.data();
    }
    double cell = 0.0;
    for (int i = 0; i < nd_; ++i) cell += jxw(cp, i) * q[i];
    sum += cell;
  }
  return sum;
}

void AdvectionOperator::project(int rank, PhaseVector& dst,
                                const std::function<double(const double*, const double*)>& f) const {
  const PartitionLayout& L = part_->layout();
  Workspace& ws = workspace(rank, 0);
  OpCounters c;
  const std::size_t len = nd_;
  const index_t n_local = part_->n_owned(rank);
  auto own = dst.owned_mut(rank);
  for (index_t l = 0; l < n_local; ++l) {
    const CellPair cp = L.owned_cell(rank, l);
    for (int q = 0; q < nd_; ++q) ws.u[q] = f(x_point(cp.cx, q % nqx_), v_point(cp.cv, q / nqx_));
    double* out = own.data() + static_cast<std::size_t>(l) * nd_;
    if (basis_.collocation) {
      std::copy_n(ws.u.data(), len, out);
    } else {
      apply_all_dims(basis_.inverse_v, d_, n_, 1, {ws.u.data(), len}, {ws.out.data(), len},
                     {ws.scratch.data(), len}, c);
      std::copy_n(ws.out.data(), len, out);
    }
  }
}

double AdvectionOperator::l2_error_squared(int rank, const PhaseVector& u,
                                           const std::function<double(const double*, const double*)>& f) const {
  const PartitionLayout& L = part_->layout();
  Workspace& ws = workspace(rank, 0);
  OpCounters c;
  const std::size_t len = nd_;
  double sum = 0.0;
  const index_t n_local = part_->n_owned(rank);
  for (index_t l = 0; l < n_local; ++l) {
    const CellPair cp = L.owned_cell(rank, l);
    const double* q = u.cell(rank, l);
    if (!basis_.collocation) {
      interpolate_to_quadrature(basis_, d_, 1, {q, len}, {ws.y.data(), len}, {ws.scratch.data(), len}, c);
      q = ws.y.data();
    }
    for (int i = 0; i < nd_; ++i) {
      const double e = q[i] - f(x_point(cp.cx, i % nqx_), v_point(cp.cv, i / nqx_));
      sum += jxw(cp, i) * e * e;
    }
  }
  return sum;
}

}  // namespace hyperdg
