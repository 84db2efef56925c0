#include "hyperdg/timeint.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace hyperdg {

const LSRKScheme& LSRKScheme::rk45() {
  static const LSRKScheme s{
      {0.0, -567301805773.0 / 1357537059087.0, -2404267990393.0 / 2016746695238.0,
       -3550918686646.0 / 2091501179385.0, -1275806237668.0 / 842570457699.0},
      {1432997174477.0 / 9575080441755.0, 5161836677717.0 / 13612068292357.0, 1720146321549.0 / 2090206949498.0,
       3134564353537.0 / 4481467310338.0, 2277821191437.0 / 14882151754819.0},
      {0.0, 1432997174477.0 / 9575080441755.0, 2526269341429.0 / 6820363962896.0,
       2006345519317.0 / 3224310063776.0, 2802321613138.0 / 2924317926251.0}};
  return s;
}

std::array<double, 6> stability_polynomial(const LSRKScheme& s) {
  // apply the scheme to y' = z y with polynomial-valued u and g
  std::array<double, 6> u{1, 0, 0, 0, 0, 0}, g{};
  for (int i = 0; i < s.stages(); ++i) {
    std::array<double, 6> ng{};
    for (int j = 0; j < 6; ++j) ng[j] = s.a[i] * g[j] + (j > 0 ? u[j - 1] : 0.0);
    g = ng;
    for (int j = 0; j < 6; ++j) u[j] += s.b[i] * g[j];
  }
  return u;
}

void lsrk_step(const LSRKScheme& s, std::vector<double>& u, std::vector<double>& g, std::vector<double>& k,
               double t, double dt, const VectorRhs& rhs) {
  if (g.size() != u.size()) g.assign(u.size(), 0.0);
  k.resize(u.size());
  for (int i = 0; i < s.stages(); ++i) {
    rhs(t + s.c[i] * dt, u, k);
    for (std::size_t j = 0; j < u.size(); ++j) {
      g[j] = s.a[i] * g[j] + dt * k[j];
      u[j] += s.b[i] * g[j];
    }
  }
}

void write_stage_csv(std::ostream& os, const std::vector<StageRow>& rows) {
  os << "step,stage,seconds,flops,modeled_bytes\n";
  for (const auto& r : rows)
    os << r.step << "," << r.stage << "," << r.seconds << "," << r.flops << "," << r.modeled_bytes << "\n";
}

void lsrk_step(const LSRKScheme& s, int rank, PhaseVector& u, PhaseVector& k, PhaseVector& g, double t, double dt,
               const PhaseRhs& rhs, OpCounters& c, std::vector<StageRow>* rows, int step) {
  if (dt <= 0) throw std::invalid_argument("time step must be positive");
  for (int i = 0; i < s.stages(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    OpCounters sc;
    u.update_ghost_values(rank, &sc);
    rhs(rank, t + s.c[i] * dt, u, k, sc);
    u.release(rank);
    const double a = s.a[i], b = s.b[i];
    auto gv = g.owned_mut(rank);
    auto uv = u.owned_mut(rank);
    const auto kv = k.owned(rank);
    for (std::size_t j = 0; j < uv.size(); ++j) {
      gv[j] = a * gv[j] + dt * kv[j];
      uv[j] += b * gv[j];
    }
    sc.flops += 5 * uv.size();
    sc.modeled_doubles_moved += 6 * uv.size();
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rows) rows->push_back({step, i, sec, sc.flops, 8 * sc.modeled_doubles_moved});
    c += sc;
  }
#if HYPERDG_PROTOCOL_CHECKS
  for (double x : u.owned(rank))
    if (!std::isfinite(x)) throw std::runtime_error("non-finite solution value; the time step is likely unstable");
#endif
}

double cfl_time_step(const TensorTopology& topo, int k, double speed, double cfl) {
  double h = std::numeric_limits<double>::infinity();
  for (int a = 0; a < topo.dim_x(); ++a) h = std::min(h, topo.mesh_x().cell_width(a));
  for (int a = 0; a < topo.dim_v(); ++a) h = std::min(h, topo.mesh_v().cell_width(a));
  const double s = speed > 0 ? speed : 1.0;
  return cfl * h / (s * (k + 1) * (k + 1));
}

InitialCondition default_advection_initial(int d_x, int d_v) {
  return [d_x, d_v](const double* x, const double* v) {
    double p = 1.0;
    for (int a = 0; a < d_x; ++a) p *= std::sin(2 * std::numbers::pi * x[a]);
    for (int a = 0; a < d_v; ++a) p *= std::sin(2 * std::numbers::pi * v[a]);
    return 1.0 + 0.5 * p;
  };
}

AdvectionResult run_advection(const RunConfig& cfg, const InitialCondition& initial_in) {
  cfg.validate();
  const InitialCondition f0 = initial_in ? initial_in : default_advection_initial(cfg.d_x, cfg.d_v);
  auto part = make_partitioner(cfg, make_unit_topology(cfg));
  const std::vector<double> a = cfg.resolved_velocity();
  const AdvectionOperator op(part, cfg.quadrature, make_operator_options(cfg), AdvectionField::constant(a));

  double speed = 0.0;
  for (double x : a) speed += x * x;
  speed = std::sqrt(speed);
  AdvectionResult res;
  double dt = cfg.dt > 0 ? cfg.dt : cfl_time_step(part->topology(), cfg.k, speed, cfg.cfl);
  int n_steps = cfg.n_steps;
  if (cfg.t_end > 0) {
    n_steps = static_cast<int>(std::ceil(cfg.t_end / dt - 1e-9));
    dt = cfg.t_end / n_steps;
  }
  res.dt = dt;
  res.n_steps = n_steps;
  res.t_end = dt * n_steps;

  const std::uint64_t alloc0 = PhaseVector::allocations();
  const GhostMode aux_mode = cfg.loop == LoopStrategy::fcl ? GhostMode::buffered : cfg.mode;
  PhaseVector u(part, cfg.mode), k(part, aux_mode), g(part, aux_mode);
  res.vector_allocations = PhaseVector::allocations() - alloc0;

  const int p = part->n_ranks();
  std::vector<int> all(p);
  for (int r = 0; r < p; ++r) all[r] = r;
  std::vector<OpCounters> counters(p);
  std::vector<std::vector<StageRow>> rows(p);
  std::vector<double> mass_hist(n_steps + 1, 0.0);
  double err2 = 0.0, err0 = 0.0;
  const int dx = cfg.d_x, dv = cfg.d_v;
  const double t_final = res.t_end;
  auto exact = [&](const double* x, const double* v) {
    double xs[max_lowdim], vs[max_lowdim];
    for (int i = 0; i < dx; ++i) xs[i] = x[i] - a[i] * t_final - std::floor(x[i] - a[i] * t_final);
    for (int i = 0; i < dv; ++i) vs[i] = v[i] - a[dx + i] * t_final - std::floor(v[i] - a[dx + i] * t_final);
    return f0(xs, vs);
  };
  const PhaseRhs rhs = [&](int rank, double, const PhaseVector& src, PhaseVector& dst, OpCounters& c) {
    op.apply(cfg.loop, rank, src, dst, c);
  };

  for (int r = 0; r < p; ++r) op.project(r, u, f0);
  res.initial = u.to_global();

  Team& team = part->team();
  team.run([&](int rank) {
    double m[2] = {op.integral(rank, u), op.l2_error_squared(rank, u, f0)};
    team.allreduce_sum(rank, all, m);
    if (rank == 0) {
      mass_hist[0] = m[0];
      err0 = m[1];
    }
    for (int s = 0; s < n_steps; ++s) {
      lsrk_step(LSRKScheme::rk45(), rank, u, k, g, s * dt, dt, rhs, counters[rank], &rows[rank], s);
      double ms = op.integral(rank, u);
      team.allreduce_sum(rank, all, {&ms, 1});
      if (rank == 0) mass_hist[s + 1] = ms;
    }
    double e = op.l2_error_squared(rank, u, exact);
    team.allreduce_sum(rank, all, {&e, 1});
    if (rank == 0) err2 = e;
  });

  for (const auto& c : counters) res.counters += c;
  // stage rows summed over ranks; seconds is the slowest rank
  std::map<std::pair<int, int>, StageRow> merged;
  for (const auto& rr : rows)
    for (const auto& r : rr) {
      auto& m = merged[{r.step, r.stage}];
      m.step = r.step;
      m.stage = r.stage;
      m.seconds = std::max(m.seconds, r.seconds);
      m.flops += r.flops;
      m.modeled_bytes += r.modeled_bytes;
    }
  for (const auto& [key, r] : merged) res.stages.push_back(r);
  res.rhs_evaluations = res.counters.operator_applications;
  res.ghost_updates = res.counters.ghost_updates;
  res.mass = std::move(mass_hist);
  res.l2_error = std::sqrt(err2);
  res.initial_l2_error = std::sqrt(err0);
  res.final_state = u.to_global();
  return res;
}

}  // namespace hyperdg
