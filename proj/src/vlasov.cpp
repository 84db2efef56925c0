#include "hyperdg/vlasov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "hyperdg/kernels.hpp"

namespace hyperdg {

namespace {

int ipow(int b, int e) {
  int r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

VlasovPoisson::VlasovPoisson(const RunConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (cfg_.deformation != 0.0) throw std::invalid_argument("the Vlasov-Poisson solver requires Cartesian meshes");
  if (cfg_.d_x != cfg_.d_v) throw std::invalid_argument("the Vlasov-Poisson solver requires d_x == d_v");
  if (cfg_.storage == MappingStorage::full_highdim)
    throw std::invalid_argument("full_highdim storage supports constant fields only");
  const int dx = cfg_.d_x, dv = cfg_.d_v;
  const double L = x_length();
  std::vector<double> xlo(dx, 0.0), xhi(dx, L), vlo(dv, -cfg_.v_max), vhi(dv, cfg_.v_max);
  part_ = make_partitioner(cfg_, make_topology(cfg_, xlo, xhi, vlo, vhi));
  const Basis1D& probe_basis = build_basis(cfg_.k, cfg_.quadrature);
  nq_ = probe_basis.n_q();
  nqx_ = ipow(nq_, dx);
  field_ = std::make_shared<FieldTable>(part_->layout(), dx, nqx_);
  op_ = std::make_unique<AdvectionOperator>(part_, cfg_.quadrature, make_operator_options(cfg_),
                                            AdvectionField::phase_space(field_));

  // cell-centred samples: (k+1) per cell and axis at (s + 1/2) / (k+1)
  const int ns = cfg_.k + 1;
  const LagrangeBasis lq(probe_basis.quadrature.points);
  sample_matrix_.assign(static_cast<std::size_t>(ns) * nq_, 0.0);
  for (int s = 0; s < ns; ++s)
    for (int q = 0; q < nq_; ++q) sample_matrix_[s * nq_ + q] = lq.value(q, (s + 0.5) / ns);

  const LowDimMesh& mx = part_->topology().mesh_x();
  std::vector<int> n(dx);
  std::vector<double> len(dx), origin(dx);
  quad_coords_.assign(dx, {});
  for (int a = 0; a < dx; ++a) {
    n[a] = mx.subdivisions(a) * ns;
    len[a] = mx.extent(a);
    origin[a] = mx.lower(a) + 0.5 * mx.cell_width(a) / ns;
    for (int c = 0; c < mx.subdivisions(a); ++c)
      for (int q = 0; q < nq_; ++q)
        quad_coords_[a].push_back(mx.lower(a) + (c + probe_basis.quadrature.points[q]) * mx.cell_width(a));
  }
  poisson_.assign(part_->n_ranks(), PeriodicPoisson(n, len, origin));
  energy_.assign(part_->n_ranks(), 0.0);
}

VlasovPoisson::~VlasovPoisson() = default;

double VlasovPoisson::x_length() const { return 2.0 * std::numbers::pi / cfg_.kappa; }

double VlasovPoisson::initial_value(const double* x, const double* v) const {
  double pert = 0.0, v2 = 0.0;
  for (int a = 0; a < cfg_.d_x; ++a) pert += std::cos(cfg_.kappa * x[a]);
  for (int a = 0; a < cfg_.d_v; ++a) v2 += v[a] * v[a];
  return (1.0 + cfg_.alpha * pert) * std::pow(2.0 * std::numbers::pi, -0.5 * cfg_.d_v) * std::exp(-0.5 * v2);
}

void VlasovPoisson::project_initial(int rank, PhaseVector& f) const {
  op_->project(rank, f, [this](const double* x, const double* v) { return initial_value(x, v); });
}

double VlasovPoisson::time_step() const {
  if (cfg_.dt > 0) return cfg_.dt;
  return cfl_time_step(part_->topology(), cfg_.k, cfg_.v_max * std::sqrt(static_cast<double>(cfg_.d_v)), cfg_.cfl);
}

std::vector<double> VlasovPoisson::reduce_density(int rank, const PhaseVector& f, OpCounters& c) const {
  const PartitionLayout& L = part_->layout();
  const CellRange xr = L.x_owned(L.col_index(rank));
  const Basis1D& basis = op_->basis();
  const int d = cfg_.dim(), nd = ipow(nq_, d), nqv = ipow(nq_, cfg_.d_v);
  const LowDimGeometryTable& gv = op_->mapping().v();
  std::vector<double> dens(static_cast<std::size_t>(xr.size()) * nqx_, 0.0);
  std::vector<double> fq(nd), scratch(nd);
  const index_t n_local = part_->n_owned(rank);
  for (index_t l = 0; l < n_local; ++l) {
    const CellPair cp = L.owned_cell(rank, l);
    const double* vals = f.cell(rank, l);
    if (!basis.collocation) {
      interpolate_to_quadrature(basis, d, 1, {vals, static_cast<std::size_t>(nd)}, fq, scratch, c);
      vals = fq.data();
    }
    const index_t slot = op_->mapping().v_slot(cp.cv);
    double* out = dens.data() + (cp.cx - xr.begin) * nqx_;
    for (int qv = 0; qv < nqv; ++qv) {
      const double jw = gv.cell_det(slot, qv) * gv.weight[qv];
      for (int qx = 0; qx < nqx_; ++qx) out[qx] += vals[qv * nqx_ + qx] * jw;
    }
    c.flops += 2ull * nd;
    c.modeled_doubles_moved += nd;
  }
  part_->team().allreduce_sum(rank, L.column_group(rank), dens);
  for (double& r : dens) r = 1.0 - r;
  return dens;
}

void VlasovPoisson::update_field(int rank, const PhaseVector& f, OpCounters& c) {
  const PartitionLayout& L = part_->layout();
  const LowDimMesh& mx = part_->topology().mesh_x();
  const int dx = cfg_.d_x, ns = cfg_.k + 1;
  const std::vector<double> local = reduce_density(rank, f, c);
  const std::vector<double> rho = part_->team().allgather(rank, L.row_group(rank), local);

  // sample the density polynomial of every x-cell on the equispaced grid
  PeriodicPoisson& solver = poisson_[rank];
  std::vector<double> samples(solver.size(), 0.0);
  DenseMatrix sm(ns, nq_);
  sm.data = sample_matrix_;
  const Matrix1D S(sm);
  const TensorShape shape = TensorShape::uniform(dx, nq_);
  std::vector<double> a(nqx_), b(nqx_);
  OpCounters scratch_counters;
  for (index_t cx = 0; cx < mx.cell_count(); ++cx) {
    std::copy_n(rho.begin() + cx * nqx_, nqx_, a.begin());
    TensorShape sh = shape;
    for (int ax = 0; ax < dx; ++ax) {
      contract_dim(S, ax, sh, 1, a, b, scratch_counters);
      sh = sh.with_extent(ax, ns);
      std::swap(a, b);
    }
    const auto cc = mx.cell_coords(cx);
    for (int s = 0; s < nqx_; ++s) {
      std::size_t g = 0, stride = 1;
      int rem = s;
      for (int ax = 0; ax < dx; ++ax) {
        const int sa = rem % ns;
        rem /= ns;
        g += static_cast<std::size_t>(cc[ax] * ns + sa) * stride;
        stride *= static_cast<std::size_t>(mx.subdivisions(ax)) * ns;
      }
      samples[g] = a[s];
    }
  }
  solver.solve(samples);
  const std::vector<double> E = solver.field_at(quad_coords_);

  // scatter E to the rank's x-cells and integrate the energy over all cells
  const CellRange xr = L.x_owned(L.col_index(rank));
  const LowDimGeometryTable& gx = op_->mapping().x();
  double energy = 0.0;
  for (index_t cx = 0; cx < mx.cell_count(); ++cx) {
    const auto cc = mx.cell_coords(cx);
    const bool mine = xr.contains(cx);
    double* dst = mine ? field_->cell(rank, cx) : nullptr;
    const index_t slot = op_->mapping().x_slot(cx);
    for (int q = 0; q < nqx_; ++q) {
      std::size_t g = 0, stride = 1;
      int rem = q;
      for (int ax = 0; ax < dx; ++ax) {
        const int qa = rem % nq_;
        rem /= nq_;
        g += static_cast<std::size_t>(cc[ax] * nq_ + qa) * stride;
        stride *= static_cast<std::size_t>(mx.subdivisions(ax)) * nq_;
      }
      double e2 = 0.0;
      for (int m = 0; m < dx; ++m) {
        const double e = E[g * dx + m];
        e2 += e * e;
        if (dst) dst[q * dx + m] = e;
      }
      energy += 0.5 * e2 * gx.cell_det(slot, q) * gx.weight[q];
    }
  }
  energy_[rank] = energy;
}

void VlasovPoisson::rhs(int rank, double, const PhaseVector& f, PhaseVector& k, OpCounters& c) {
  update_field(rank, f, c);
  op_->apply(cfg_.loop, rank, f, k, c);
}

void write_landau_csv(std::ostream& os, const std::vector<LandauRow>& rows) {
  os << "step,t,field_energy,total_mass\n";
  os.precision(17);
  for (const auto& r : rows) os << r.step << "," << r.t << "," << r.field_energy << "," << r.total_mass << "\n";
}

DampingFit fit_damping(const std::vector<double>& t, const std::vector<double>& energy, double t_min, double t_max) {
  if (t.size() != energy.size()) throw std::invalid_argument("time and energy series differ in length");
  std::vector<double> tm, lm;
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (t[i] < t_min || t[i] > t_max) continue;
    if (!(energy[i] > energy[i - 1] && energy[i] >= energy[i + 1]) || energy[i] <= 0) continue;
    // parabola through the three log values around the sample maximum
    const double y0 = std::log(energy[i - 1]), y1 = std::log(energy[i]), y2 = std::log(energy[i + 1]);
    const double h = t[i + 1] - t[i];
    const double den = y0 - 2 * y1 + y2;
    double off = 0.0, peak = y1;
    if (den < 0) {
      off = 0.5 * (y0 - y2) / den;
      peak = y1 - 0.25 * (y0 - y2) * off;
    }
    tm.push_back(t[i] + off * h);
    lm.push_back(peak);
  }
  DampingFit fit;
  fit.n_maxima = static_cast<int>(tm.size());
  if (tm.size() < 3) return fit;
  const double n = static_cast<double>(tm.size());
  double st = 0, sl = 0, stt = 0, stl = 0;
  for (std::size_t i = 0; i < tm.size(); ++i) {
    st += tm[i];
    sl += lm[i];
    stt += tm[i] * tm[i];
    stl += tm[i] * lm[i];
  }
  const double slope = (n * stl - st * sl) / (n * stt - st * st);
  fit.gamma = -0.5 * slope;
  // the energy peaks twice per field period
  fit.omega = std::numbers::pi * (n - 1) / (tm.back() - tm.front());
  fit.valid = true;
  return fit;
}

LandauResult run_landau(const RunConfig& cfg, double fit_t_min) {
  VlasovPoisson vp(cfg);
  auto part = vp.partitioner();
  LandauResult res;
  double dt = vp.time_step();
  int n_steps = cfg.n_steps;
  if (cfg.t_end > 0) {
    n_steps = static_cast<int>(std::ceil(cfg.t_end / dt - 1e-9));
    dt = cfg.t_end / n_steps;
  }
  res.dt = dt;
  res.n_steps = n_steps;
  res.reference = landau_root(cfg.kappa);

  const GhostMode aux_mode = cfg.loop == LoopStrategy::fcl ? GhostMode::buffered : cfg.mode;
  PhaseVector u(part, cfg.mode), k(part, aux_mode), g(part, aux_mode);
  const int p = part->n_ranks();
  std::vector<int> all(p);
  for (int r = 0; r < p; ++r) all[r] = r;
  std::vector<OpCounters> counters(p);
  std::vector<std::vector<StageRow>> rows(p);
  res.rows.resize(n_steps + 1);
  for (int r = 0; r < p; ++r) vp.project_initial(r, u);

  const PhaseRhs rhs = [&](int rank, double t, const PhaseVector& src, PhaseVector& dst, OpCounters& c) {
    vp.rhs(rank, t, src, dst, c);
  };
  part->team().run([&](int rank) {
    auto record = [&](int step) {
      // the field belongs to the current state: refresh it before sampling
      vp.update_field(rank, u, counters[rank]);
      double m = vp.op().integral(rank, u);
      part->team().allreduce_sum(rank, all, {&m, 1});
      if (rank == 0) res.rows[step] = {step, step * dt, vp.field_energy(rank), m};
    };
    record(0);
    for (int s = 0; s < n_steps; ++s) {
      lsrk_step(LSRKScheme::rk45(), rank, u, k, g, s * dt, dt, rhs, counters[rank], &rows[rank], s);
      record(s + 1);
    }
  });
  for (const auto& c : counters) res.counters += c;
  for (const auto& r : rows[0]) res.stages.push_back(r);
  std::vector<double> t, e;
  for (const auto& r : res.rows) {
    t.push_back(r.t);
    e.push_back(r.field_energy);
  }
  res.fit = fit_damping(t, e, fit_t_min);
  res.final_state = u.to_global();
  return res;
}

}  // namespace hyperdg
