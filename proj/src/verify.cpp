#include "hyperdg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "hyperdg/dense_operator.hpp"
#include "hyperdg/dispersion.hpp"
#include "hyperdg/operators.hpp"
#include "hyperdg/timeint.hpp"

namespace hyperdg {

ApplyResult apply_operator_global(const RunConfig& cfg, const std::vector<double>& input) {
  cfg.validate();
  auto part = make_partitioner(cfg, make_unit_topology(cfg));
  const AdvectionOperator op(part, cfg.quadrature, make_operator_options(cfg),
                             AdvectionField::constant(cfg.resolved_velocity()));
  PhaseVector src(part, cfg.mode), dst(part, cfg.loop == LoopStrategy::fcl ? GhostMode::buffered : cfg.mode);
  src.from_global(input);
  std::vector<OpCounters> counters(part->n_ranks());
  part->team().run([&](int rank) {
    src.update_ghost_values(rank, &counters[rank]);
    op.apply(cfg.loop, rank, src, dst, counters[rank]);
    src.release(rank);
  });
  ApplyResult res;
  res.output = dst.to_global();
  for (const auto& c : counters) res.counters += c;
  return res;
}

std::vector<double> random_global_vector(const RunConfig& cfg, unsigned seed) {
  const index_t n = dof_count(make_unit_topology(cfg), cfg.k);
  std::vector<double> v(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& x : v) x = dist(rng);
  return v;
}

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

namespace {

constexpr index_t verify_dof_budget = 4096;

RunConfig small_config(RunConfig cfg) {
  cfg.subdivisions_x.assign(cfg.d_x, 1);
  cfg.subdivisions_v.assign(cfg.d_v, 1);
  cfg.p_x = cfg.p_v = 1;
  cfg.node_block = {1, 1};
  cfg.storage = MappingStorage::tensor_per_space;
  const index_t per_cell = checked_pow(cfg.k + 1, cfg.dim());
  for (int round = 0; round < 2; ++round)
    for (int a = 0; a < cfg.dim(); ++a) {
      int& s = a < cfg.d_x ? cfg.subdivisions_x[a] : cfg.subdivisions_v[a - cfg.d_x];
      index_t cells = 1;
      for (int x : cfg.subdivisions_x) cells *= x;
      for (int x : cfg.subdivisions_v) cells *= x;
      if (cells / s * (s + 1) * per_cell <= verify_dof_budget) s += 1;
    }
  return cfg;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = a.size() == b.size() ? 0.0 : INFINITY;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

VerifyCheck check(std::string name, double value, double tol, std::string detail = {}) {
  return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

std::string mesh_label(const RunConfig& c) {
  std::ostringstream os;
  os << "d=" << c.d_x << "+" << c.d_v << " k=" << c.k << " cells=";
  for (int s : c.subdivisions_x) os << s << "x";
  for (std::size_t i = 0; i < c.subdivisions_v.size(); ++i) os << c.subdivisions_v[i] << (i + 1 < c.subdivisions_v.size() ? "x" : "");
  if (c.deformation > 0) os << " deformed";
  return os.str();
}

double monomial_error(const QuadratureRule1D& r, int p) {
  double s = 0.0;
  for (int q = 0; q < r.n_q; ++q) s += r.weights[q] * std::pow(r.points[q], p);
  return std::abs(s - 1.0 / (p + 1));
}

}  // namespace

VerifyReport run_verify(const RunConfig& user_cfg) {
  user_cfg.validate();
  VerifyReport rep;
  RunConfig cfg = small_config(user_cfg);
  cfg.loop = LoopStrategy::ecl;
  cfg.mode = GhostMode::non_buffered;
  const std::string label = mesh_label(cfg);
  const std::vector<double> x = random_global_vector(cfg, cfg.seed);

  // dense oracle
  const ApplyResult ecl = apply_operator_global(cfg, x);
  {
    const auto topo = make_unit_topology(cfg);
    const DenseOperator dense = assemble_dense_operator(topo, cfg.k, cfg.quadrature,
                                                        constant_point_field(cfg.resolved_velocity()), cfg.flux);
    const double err = max_abs_diff(ecl.output, dense.apply(dense.merged, x));
    rep.checks.push_back(check("dense_oracle", err / std::max(1.0, max_abs(ecl.output)), 1e-12, label));
  }

  // face-centric loop
  {
    RunConfig f = cfg;
    f.loop = LoopStrategy::fcl;
    f.mode = GhostMode::buffered;
    const ApplyResult fcl = apply_operator_global(f, x);
    rep.checks.push_back(check("ecl_equals_fcl", max_abs_diff(ecl.output, fcl.output) / std::max(1.0, max_abs(ecl.output)), 1e-13, label));
    const bool twice = ecl.counters.flux_evals == 2 * fcl.counters.flux_evals;
    rep.checks.push_back({"ecl_flux_evals_twice_fcl", twice, static_cast<double>(ecl.counters.flux_evals),
                          2.0 * fcl.counters.flux_evals, label});
  }

  // partition and ghost-mode invariance
  {
    double worst = 0.0;
    bool bitwise = true;
    for (auto [px, pv] : {std::pair{2, 1}, std::pair{1, 2}, std::pair{2, 2}}) {
      RunConfig p = cfg;
      p.p_x = std::min(px, p.subdivisions_x[0]);
      p.p_v = std::min(pv, p.subdivisions_v[0]);
      const ApplyResult nb = apply_operator_global(p, x);
      worst = std::max(worst, max_abs_diff(ecl.output, nb.output));
      p.mode = GhostMode::buffered;
      const ApplyResult bu = apply_operator_global(p, x);
      bitwise = bitwise && nb.output == bu.output;
    }
    rep.checks.push_back(check("partition_invariance", worst, 1e-14, label));
    rep.checks.push_back({"ghost_mode_bitwise", bitwise, bitwise ? 0.0 : 1.0, 0.0, label});
  }

  // conservation over a short run
  {
    RunConfig c = cfg;
    c.n_steps = 20;
    c.t_end = 0.0;
    const AdvectionResult r = run_advection(c);
    double drift = 0.0;
    for (std::size_t s = 1; s < r.mass.size(); ++s)
      drift = std::max(drift, std::abs(r.mass[s] - r.mass[s - 1]) / std::abs(r.mass[0]));
    rep.checks.push_back(check("mass_drift_per_step", drift, 1e-11, label));
  }

  // quadrature exactness
  {
    double worst = 0.0;
    bool beyond = true;
    for (int n = 2; n <= 10; ++n) {
      const auto gl = gauss_legendre_rule(n), gll = gauss_lobatto_rule(n);
      for (int p = 0; p <= 2 * n - 1; ++p) worst = std::max(worst, monomial_error(gl, p));
      for (int p = 0; p <= 2 * n - 3; ++p) worst = std::max(worst, monomial_error(gll, p));
      beyond = beyond && monomial_error(gl, 2 * n) > 1e-13 && monomial_error(gll, 2 * n - 2) > 1e-13;
    }
    rep.checks.push_back(check("quadrature_exactness", worst, 1e-13));
    rep.checks.push_back({"quadrature_inexact_beyond", beyond, 0.0, 0.0, ""});
  }

  // time integrator order on y' = -y
  {
    auto err = [](int n) {
      std::vector<double> u{1.0}, g(1), k(1);
      const double dt = 1.0 / n;
      const VectorRhs rhs = [](double, const std::vector<double>& y, std::vector<double>& out) { out[0] = -y[0]; };
      for (int s = 0; s < n; ++s) lsrk_step(LSRKScheme::rk45(), u, g, k, s * dt, dt, rhs);
      return std::abs(u[0] - std::exp(-1.0));
    };
    const double order = std::log2(err(10) / err(20));
    rep.checks.push_back(check("rk_order", std::abs(order - 4.0), 0.1, "order " + std::to_string(order)));
  }

  // dispersion root
  {
    const LandauRoot root = landau_root(cfg.kappa);
    const double res = std::abs(landau_dispersion({root.omega, -root.gamma}, cfg.kappa));
    rep.checks.push_back(check("dispersion_residual", res, 1e-10));
  }
  return rep;
}

void print_report(std::ostream& os, const VerifyReport& r) {
  for (const auto& c : r.checks) {
    os << (c.passed ? "ok   " : "FAIL ") << c.name << "  value=" << c.value << " tol=" << c.tolerance;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  os << (r.ok() ? "all checks passed" : "some checks failed") << "\n";
}

}  // namespace hyperdg
