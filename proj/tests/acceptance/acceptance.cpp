// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "hyperdg/bench.hpp"
#include "hyperdg/config.hpp"
#include "hyperdg/dense_operator.hpp"
#include "hyperdg/dispersion.hpp"
#include "hyperdg/kernels.hpp"
#include "hyperdg/mapping.hpp"
#include "hyperdg/partition.hpp"
#include "hyperdg/timeint.hpp"
#include "hyperdg/verify.hpp"
#include "hyperdg/vlasov.hpp"
#include "oracles.hpp"

using namespace hyperdg;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

RunConfig base_config(int d, int k, bool deformed) {
  RunConfig c;
  std::tie(c.d_x, c.d_v) = split_dimension(d);
  c.k = k;
  c.subdivisions_x.assign(c.d_x, 1);
  c.subdivisions_v.assign(c.d_v, 1);
  // grow round robin up to three cells per axis within 4096 DoFs
  const index_t per_cell = checked_pow(k + 1, d);
  for (int s = 2; s <= 3; ++s)
    for (int a = 0; a < d; ++a) {
      int& sub = a < c.d_x ? c.subdivisions_x[a] : c.subdivisions_v[a - c.d_x];
      index_t cells = 1;
      for (int x : c.subdivisions_x) cells *= x;
      for (int x : c.subdivisions_v) cells *= x;
      if (cells / sub * s * per_cell <= 4096) sub = s;
    }
  const double speeds[6] = {0.7, -1.3, 0.4, 1.1, -0.6, 0.9};
  c.velocity.assign(speeds, speeds + d);
  if (deformed) {
    int max_sub = 1;
    for (int x : c.subdivisions_x) max_sub = std::max(max_sub, x);
    for (int x : c.subdivisions_v) max_sub = std::max(max_sub, x);
    c.deformation = 0.4 * 0.5 / (max_sub * std::numbers::pi);
  }
  return c;
}

std::vector<RunConfig> oracle_configs() {
  std::vector<RunConfig> out;
  for (int k : {1, 2, 3})
    for (int d : {2, 3, 4})
      for (bool deformed : {false, true}) out.push_back(base_config(d, k, deformed));
  return out;
}

std::string label(const RunConfig& c) {
  return fmt("k=%d d=%d+%d %s", c.k, c.d_x, c.d_v, c.deformation > 0 ? "deformed" : "cartesian");
}

oracle::CartesianProblem problem_of(const RunConfig& c) {
  oracle::CartesianProblem p;
  p.cells.insert(p.cells.end(), c.subdivisions_x.begin(), c.subdivisions_x.end());
  p.cells.insert(p.cells.end(), c.subdivisions_v.begin(), c.subdivisions_v.end());
  p.length.assign(c.dim(), 1.0);
  p.d_x = c.d_x;
  p.k = c.k;
  p.lobatto_quadrature = c.quadrature == QuadratureKind::gauss_lobatto;
  p.upwind = c.flux == FluxKind::upwind;
  p.speed = c.resolved_velocity();
  return p;
}

// 1. matrix-free apply against the dense assembled operator
Outcome oracle_equivalence() {
  double worst = 0.0, worst_kron = 0.0;
  int n = 0;
  std::string where;
  for (RunConfig c : oracle_configs()) {
    for (FluxKind flux : {FluxKind::upwind, FluxKind::central}) {
      c.flux = flux;
      const auto x = random_global_vector(c, 11);
      const auto out = apply_operator_global(c, x).output;
      const auto dense = assemble_dense_operator(make_unit_topology(c), c.k, c.quadrature,
                                                 constant_point_field(c.resolved_velocity()), c.flux);
      const double err = max_abs_diff(out, dense.apply(dense.merged, x));
      if (err > worst) {
        worst = err;
        where = label(c);
      }
      if (c.deformation == 0.0) worst_kron = std::max(worst_kron, max_abs_diff(out, oracle::kronecker_apply(problem_of(c), x)));
      ++n;
    }
  }
  return {worst < 1e-12 && worst_kron < 1e-12,
          fmt("%d runs, max abs err %.2e vs dense (%s), %.2e vs Kronecker oracle", n, worst, where.c_str(), worst_kron)};
}

// 2. element-centric equals face-centric
Outcome ecl_equals_fcl() {
  double worst = 0.0;
  bool twice = true;
  int n = 0;
  for (const RunConfig& c : oracle_configs()) {
    const auto x = random_global_vector(c, 12);
    const auto e = apply_operator_global(c, x);
    RunConfig f = c;
    f.loop = LoopStrategy::fcl;
    f.mode = GhostMode::buffered;
    const auto g = apply_operator_global(f, x);
    worst = std::max(worst, max_abs_diff(e.output, g.output));
    twice = twice && e.counters.flux_evals == 2 * g.counters.flux_evals;
    ++n;
  }
  return {worst < 1e-13 && twice,
          fmt("%d configs, max abs diff %.2e, flux evals ECL = 2 x FCL: %s", n, worst, twice ? "yes" : "no")};
}

// 3. observed order of smooth periodic advection
Outcome convergence() {
  bool ok = true;
  std::string detail;
  for (int k : {1, 2, 3}) {
    std::vector<double> h, e;
    const int base = k == 1 ? 8 : 4;
    for (int r = 0; r < 3; ++r) {
      RunConfig c;
      c.k = k;
      c.subdivisions_x = {base << r};
      c.subdivisions_v = {base << r};
      c.velocity = {1.0, 0.5};
      c.t_end = 0.5;
      c.cfl = 0.2;
      const auto res = run_advection(c);
      h.push_back(1.0 / (base << r));
      e.push_back(res.l2_error);
    }
    const double slope = oracle::loglog_slope(h, e);
    ok = ok && std::abs(slope - (k + 1)) <= 0.25;
    detail += fmt("k=%d order %.3f (errors %.2e %.2e %.2e)  ", k, slope, e[0], e[1], e[2]);
  }
  return {ok, detail};
}

// 4. discrete mass drift
Outcome conservation() {
  double worst = 0.0;
  std::vector<RunConfig> cases;
  for (auto [d, k, deformed] : {std::tuple{2, 3, false}, std::tuple{3, 2, true}, std::tuple{4, 1, true}}) {
    RunConfig c = base_config(d, k, deformed);
    c.n_steps = 100;
    cases.push_back(c);
  }
  RunConfig split = cases[1];
  split.p_x = 2;
  split.p_v = 1;
  cases.push_back(split);
  for (const auto& c : cases) {
    const auto r = run_advection(c, [](const double* x, const double* v) { return 1.0 + std::sin(6.0 * x[0]) * std::cos(2.0 * v[0]); });
    for (std::size_t s = 1; s < r.mass.size(); ++s)
      worst = std::max(worst, std::abs(r.mass[s] - r.mass[s - 1]) / std::abs(r.mass[0]));
  }
  return {worst < 1e-11, fmt("%zu runs of 100 steps, max relative drift per step %.2e", cases.size(), worst)};
}

// 5. partition and ghost-mode invariance
Outcome partition_invariance() {
  double worst = 0.0;
  bool bitwise = true;
  int runs = 0;
  for (auto [d, deformed] : {std::pair{2, false}, std::pair{4, true}}) {
    RunConfig c = base_config(d, 2, deformed);
    c.subdivisions_x[0] = std::max(c.subdivisions_x[0], 2);
    c.subdivisions_v[0] = std::max(c.subdivisions_v[0], 2);
    c.n_steps = 3;
    const auto x = random_global_vector(c, 5);
    const auto ref = apply_operator_global(c, x).output;
    const auto ref_run = run_advection(c).final_state;
    for (auto [px, pv] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 2}, std::pair{2, 2}}) {
      RunConfig p = c;
      p.p_x = px;
      p.p_v = pv;
      const auto nb = apply_operator_global(p, x).output;
      const auto nb_run = run_advection(p).final_state;
      p.mode = GhostMode::buffered;
      const auto bu = apply_operator_global(p, x).output;
      const auto bu_run = run_advection(p).final_state;
      worst = std::max({worst, max_abs_diff(ref, nb), max_abs_diff(ref_run, nb_run)});
      bitwise = bitwise && nb == bu && nb_run == bu_run;
      runs += 4;
    }
  }
  return {worst <= 1e-14 && bitwise,
          fmt("%d runs, max entry diff %.2e, buffered == non_buffered bitwise: %s", runs, worst, bitwise ? "yes" : "no")};
}

// 6. quadrature exactness against the oracle
Outcome quadrature_exactness() {
  auto err = [](const QuadratureRule1D& r, int p) {
    double s = 0.0;
    for (int q = 0; q < r.n_q; ++q) s += r.weights[q] * std::pow(r.points[q], p);
    return std::abs(s - 1.0 / (p + 1));
  };
  double worst = 0.0, node_diff = 0.0, min_beyond = INFINITY;
  for (int n = 2; n <= 10; ++n) {
    const auto gl = gauss_legendre_rule(n), gll = gauss_lobatto_rule(n);
    const auto ogl = oracle::gauss_legendre(n), ogll = oracle::gauss_lobatto(n);
    for (int q = 0; q < n; ++q)
      node_diff = std::max({node_diff, std::abs(gl.points[q] - ogl.x[q]), std::abs(gl.weights[q] - ogl.w[q]),
                            std::abs(gll.points[q] - ogll.x[q]), std::abs(gll.weights[q] - ogll.w[q])});
    for (int p = 0; p <= 2 * n - 1; ++p) worst = std::max(worst, err(gl, p));
    for (int p = 0; p <= 2 * n - 3; ++p) worst = std::max(worst, err(gll, p));
    min_beyond = std::min({min_beyond, err(gl, 2 * n), err(gll, 2 * n - 2)});
  }
  return {worst < 1e-13 && min_beyond > 1e-13 && node_diff < 1e-13,
          fmt("n_q 2..10: max error within degree %.2e, min error one degree beyond %.2e, rule vs oracle %.2e", worst,
              min_beyond, node_diff)};
}

// 7. FLOP model and mapping memory
Outcome flop_model() {
  double worst = 0.0;
  std::string detail;
  for (int k = 2; k <= 7; ++k) {
    const Basis1D b = build_basis(k, QuadratureKind::gauss_legendre);
    const auto shape = TensorShape::uniform(3, k + 1);
    std::vector<double> in(shape.size(), 1.0), out(shape.size());
    OpCounters c;
    contract_dim(b.interp, 1, shape, 1, in, out, c);
    const double measured = static_cast<double>(c.flops) / shape.size();
    const double model = even_odd_flops_model(k);
    worst = std::max(worst, std::abs(measured / model - 1.0));
    detail += fmt("k=%d %.2f/%.2f ", k, measured, model);
  }
  const double tensor = mapping_memory_per_dof(3, 3, 3, MappingStorage::tensor_per_space);
  const double full = mapping_memory_per_dof(3, 3, 3, MappingStorage::full_highdim);
  const std::string ratio = fmt("%.2f vs %.0f", tensor, full);
  return {worst <= 0.10 && ratio == "0.28 vs 36",
          fmt("measured/model FLOPs per DoF: %s(max deviation %.1f%%); mapping doubles per DoF k=3 d=6: %s", detail.c_str(),
              100 * worst, ratio.c_str())};
}

// 8. ghost volume bounds and the thought experiment
Outcome communication_bounds() {
  struct Layout {
    std::vector<int> sx, sv;
    int k, px, pv;
    std::pair<int, int> block;
  };
  // layouts whose rank blocks are cut along every axis
  const std::vector<Layout> layouts{
      {{8}, {8}, 3, 2, 2, {1, 1}},      {{12}, {8}, 2, 3, 4, {3, 1}},   {{16}, {16}, 1, 4, 4, {2, 2}},
      {{9}, {7}, 4, 3, 7, {1, 1}},      {{4, 4}, {4, 4}, 1, 8, 8, {2, 2}}, {{4, 4}, {4, 4}, 2, 8, 8, {1, 1}},
      {{4, 2, 2}, {4, 2, 2}, 1, 8, 8, {1, 1}}};
  int ranks = 0;
  bool ok = true;
  double min_margin = INFINITY;
  for (const auto& l : layouts) {
    const int dx = static_cast<int>(l.sx.size()), dv = static_cast<int>(l.sv.size());
    const TensorTopology t(LowDimMesh::unit(dx, l.sx), LowDimMesh::unit(dv, l.sv));
    const PartitionLayout layout(t, l.px, l.pv, l.block);
    const auto e = estimate_comm_volume(t, layout, l.k);
    for (const auto& r : e.ranks) {
      ok = ok && r.within_bounds();
      min_margin = std::min(min_margin, r.normalized / r.lower_bound);
      ++ranks;
    }
    ok = ok && static_cast<double>(e.total_counted) >= e.total_lower * (1 - 1e-12);
  }
  const double n = 1e12, p = 49152;
  const double fraction = total_ghost_lower_bound(6, n, p) / n;
  ok = ok && fraction >= 0.72;
  return {ok, fmt("%zu layouts, %d ranks within bounds, min counted/lower %.3f; d=6 N=1e12 p=49152: ghost fraction %.3f",
                  layouts.size(), ranks, min_margin, fraction)};
}

// 9. LSRK convergence order
Outcome rk_order() {
  std::vector<double> h, e;
  for (int n : {10, 20, 40, 80}) {
    std::vector<double> u{1.0, 0.0}, g, k;
    const double dt = 2.0 / n;
    // y'' = -y as a first-order system
    const VectorRhs rhs = [](double, const std::vector<double>& y, std::vector<double>& out) {
      out[0] = y[1];
      out[1] = -y[0];
    };
    for (int s = 0; s < n; ++s) lsrk_step(LSRKScheme::rk45(), u, g, k, s * dt, dt, rhs);
    h.push_back(dt);
    e.push_back(std::hypot(u[0] - std::cos(2.0), u[1] + std::sin(2.0)));
  }
  const double slope = oracle::loglog_slope(h, e);
  return {std::abs(slope - 4.0) <= 0.1, fmt("fitted order %.3f", slope)};
}

// 10. Landau damping against the test-side dispersion root
Outcome landau() {
  RunConfig c;
  c.k = 3;
  c.subdivisions_x = {32};
  c.subdivisions_v = {32};
  c.kappa = 0.5;
  c.alpha = 0.01;
  c.t_end = 20.0;
  const auto t0 = std::chrono::steady_clock::now();
  const LandauResult r = run_landau(c, 1.0);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double bg = std::sqrt(1.0 + 3.0 * c.kappa * c.kappa);
  const std::complex<double> root = oracle::dispersion_root(c.kappa, {bg, -0.1});
  const double g_ref = -root.imag(), w_ref = root.real();
  const double eg = std::abs(r.fit.gamma / g_ref - 1.0), ew = std::abs(r.fit.omega / w_ref - 1.0);
  return {r.fit.valid && eg <= 0.05 && ew <= 0.05 && sec < 600,
          fmt("gamma %.5f vs %.5f (%.2f%%), omega %.5f vs %.5f (%.2f%%), %d maxima, %d steps, %.0f s", r.fit.gamma, g_ref,
              100 * eg, r.fit.omega, w_ref, 100 * ew, r.fit.n_maxima, r.n_steps, sec)};
}

// 11. throughput trend over the per-batch working set
Outcome performance_trend() {
  BenchOptions opt;
  opt.dims = {6};
  opt.ks = {1, 2, 3, 4, 5, 6};
  opt.v_lens = {1, 2, 4, 8};
  opt.min_seconds = 1.0;
  const auto rows = run_bench(opt);
  const double threshold = static_cast<double>(cache_threshold_bytes());
  double peak_below = 0.0, best_above = 0.0;
  std::map<int, double> at_top;  // v_len -> throughput at the largest k
  const int k_max = opt.ks.back();
  for (const auto& r : rows) {
    if (r.working_set <= threshold) peak_below = std::max(peak_below, r.throughput);
    else best_above = std::max(best_above, r.throughput);
    if (r.cfg.k == k_max) at_top[r.cfg.v_len] = r.throughput;
  }
  const int widest = opt.v_lens.back();
  const bool decline = best_above > 0 && best_above < peak_below;
  const bool narrow_wins = at_top[1] > at_top[widest];
  std::string table;
  for (const auto& r : rows) table += fmt(" k%d/v%d=%.2f", r.cfg.k, r.cfg.v_len, r.throughput / 1e6);
  return {decline && narrow_wins,
          fmt("threshold %.0f KiB: peak below %.2f MDoF/s, best above %.2f MDoF/s; k=%d v_len 1 %.2f vs v_len %d %.2f MDoF/s;"
              " MDoF/s:%s",
              threshold / 1024, peak_below / 1e6, best_above / 1e6, k_max, at_top[1] / 1e6, widest,
              at_top[widest] / 1e6, table.c_str())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"ECL equals FCL", ecl_equals_fcl},
      {"convergence order", convergence},
      {"conservation", conservation},
      {"partition invariance", partition_invariance},
      {"quadrature exactness", quadrature_exactness},
      {"FLOP model", flop_model},
      {"communication bounds", communication_bounds},
      {"RK order", rk_order},
      {"Landau damping", landau},
      {"performance trend", performance_trend},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (i == 0 && sec >= 60) o.pass = false;
    if (i == 2 && sec >= 120) o.pass = false;
    std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str(), sec);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
