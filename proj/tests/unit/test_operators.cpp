#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "hyperdg/config.hpp"
#include "hyperdg/dense_operator.hpp"
#include "hyperdg/kernels.hpp"
#include "hyperdg/operators.hpp"
#include "hyperdg/verify.hpp"
#include "oracles.hpp"

using namespace hyperdg;

namespace {

RunConfig make_cfg(int dx, int dv, int k, std::vector<int> sx, std::vector<int> sv) {
  RunConfig c;
  c.d_x = dx;
  c.d_v = dv;
  c.k = k;
  c.subdivisions_x = std::move(sx);
  c.subdivisions_v = std::move(sv);
  c.velocity.clear();
  const double speeds[6] = {0.7, -1.3, 0.4, 1.1, -0.6, 0.9};
  for (int a = 0; a < dx + dv; ++a) c.velocity.push_back(speeds[a]);
  return c;
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

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("numerical flux examples") {
  CHECK(numerical_flux(1, 3, 2, FluxKind::central) == 4.0);
  CHECK(numerical_flux(1, 3, 2, FluxKind::upwind) == 2.0);
  CHECK(numerical_flux(1, 3, -2, FluxKind::upwind) == -6.0);
  CHECK(numerical_flux(5, 5, 0, FluxKind::upwind) == 0.0);
  CHECK(parse_flux_kind(to_string(FluxKind::central)) == FluxKind::central);
  CHECK(parse_loop_strategy(to_string(LoopStrategy::fcl)) == LoopStrategy::fcl);
}

TEST_CASE("constant input maps to zero") {
  RunConfig c = make_cfg(2, 1, 2, {3, 2}, {3});
  const index_t n = dof_count(make_unit_topology(c), c.k);
  for (double v : apply_operator_global(c, std::vector<double>(n, 2.0)).output) CHECK(std::abs(v) < 1e-12);
  // on the deformed mesh adj(J) a is constant only for a along the displacement (1, 1)
  c.deformation = 0.03;
  c.velocity = {0.8, 0.8, -1.3};
  for (double v : apply_operator_global(c, std::vector<double>(n, 2.0)).output) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("matches the Kronecker-sum oracle on Cartesian meshes") {
  std::vector<RunConfig> cases{make_cfg(1, 1, 1, {4}, {3}), make_cfg(1, 1, 3, {3}, {5}),
                               make_cfg(2, 1, 2, {3, 2}, {4}), make_cfg(2, 2, 1, {2, 3}, {3, 2}),
                               make_cfg(3, 3, 1, {2, 2, 2}, {2, 2, 2})};
  RunConfig gll = make_cfg(2, 1, 3, {2, 3}, {2});
  gll.quadrature = QuadratureKind::gauss_lobatto;
  cases.push_back(gll);
  RunConfig central = make_cfg(1, 2, 2, {3}, {2, 3});
  central.flux = FluxKind::central;
  cases.push_back(central);
  for (const auto& c : cases) {
    const auto x = random_global_vector(c, 17);
    const auto out = apply_operator_global(c, x).output;
    const auto ref = oracle::kronecker_apply(problem_of(c), x);
    double scale = 1.0;
    for (double v : ref) scale = std::max(scale, std::abs(v));
    CHECK(max_diff(out, ref) / scale < 1e-12);
  }
}

TEST_CASE("matches the dense assembled operator on deformed meshes") {
  for (int k : {1, 2}) {
    RunConfig c = make_cfg(2, 1, k, {3, 2}, {3});
    c.deformation = 0.04;
    const auto x = random_global_vector(c, 3);
    const auto out = apply_operator_global(c, x).output;
    const auto dense = assemble_dense_operator(make_unit_topology(c), k, c.quadrature,
                                               constant_point_field(c.resolved_velocity()), c.flux);
    const auto ref = dense.apply(dense.merged, x);
    double scale = 1.0;
    for (double v : ref) scale = std::max(scale, std::abs(v));
    CHECK(max_diff(out, ref) / scale < 1e-12);
  }
}

TEST_CASE("dense assembly agrees with the Kronecker oracle") {
  const RunConfig c = make_cfg(1, 1, 2, {3}, {4});
  const auto x = random_global_vector(c, 8);
  const auto dense = assemble_dense_operator(make_unit_topology(c), c.k, c.quadrature,
                                             constant_point_field(c.resolved_velocity()), c.flux);
  CHECK(max_diff(dense.apply(dense.merged, x), oracle::kronecker_apply(problem_of(c), x)) < 1e-11);
  CHECK(max_diff(dense.apply_mass(x), oracle::kronecker_mass(problem_of(c), x)) < 1e-14);
}

TEST_CASE("face-centric loop matches and halves the flux evaluations") {
  for (auto [dx, dv] : {std::pair{1, 1}, std::pair{2, 1}, std::pair{2, 2}}) {
    RunConfig c = make_cfg(dx, dv, 2, std::vector<int>(dx, 3), std::vector<int>(dv, 2));
    c.deformation = 0.02;
    const auto x = random_global_vector(c, 5);
    const auto e = apply_operator_global(c, x);
    RunConfig f = c;
    f.loop = LoopStrategy::fcl;
    f.mode = GhostMode::buffered;
    const auto g = apply_operator_global(f, x);
    CHECK(max_diff(e.output, g.output) < 1e-13);
    CHECK(e.counters.flux_evals == 2 * g.counters.flux_evals);
  }
}

TEST_CASE("mass and inverse mass round trip") {
  const RunConfig c = make_cfg(2, 1, 3, {2, 2}, {3});
  auto part = make_partitioner(c, make_unit_topology(c));
  const AdvectionOperator op(part, c.quadrature, make_operator_options(c), AdvectionField::constant(c.velocity));
  PhaseVector u(part, c.mode), m(part, c.mode), back(part, c.mode);
  const auto x = random_global_vector(c, 2);
  u.from_global(x);
  OpCounters cnt;
  op.mass(0, u, m, cnt);
  CHECK(max_diff(m.to_global(), oracle::kronecker_mass(problem_of(c), x)) < 1e-14);
  op.inverse_mass(0, m, back, cnt);
  CHECK(max_diff(back.to_global(), x) < 1e-12);
}

TEST_CASE("operator output integrates to zero") {
  RunConfig c = make_cfg(2, 2, 2, {2, 3}, {3, 2});
  c.deformation = 0.03;
  c.p_x = 2;
  auto part = make_partitioner(c, make_unit_topology(c));
  const AdvectionOperator op(part, c.quadrature, make_operator_options(c), AdvectionField::constant(c.velocity));
  PhaseVector src(part, c.mode), dst(part, c.mode);
  src.from_global(random_global_vector(c, 4));
  double total = 0.0, scale = 0.0;
  std::vector<double> integral(2);
  part->team().run([&](int rank) {
    OpCounters cnt;
    src.update_ghost_values(rank, &cnt);
    op.apply_ecl(rank, src, dst, cnt);
    src.release(rank);
    integral[rank] = op.integral(rank, dst);
  });
  for (double v : integral) total += v;
  for (double v : dst.to_global()) scale = std::max(scale, std::abs(v));
  CHECK(std::abs(total) < 1e-13 * scale);
}

TEST_CASE("projection reproduces polynomials") {
  const RunConfig c = make_cfg(1, 1, 2, {3}, {2});
  auto part = make_partitioner(c, make_unit_topology(c));
  const AdvectionOperator op(part, c.quadrature, make_operator_options(c), AdvectionField::constant(c.velocity));
  PhaseVector u(part, c.mode);
  const auto f = [](const double* x, const double* v) { return 1.0 + x[0] * x[0] - 2 * v[0]; };
  op.project(0, u, f);
  CHECK(op.l2_error_squared(0, u, f) < 1e-26);
  CHECK(op.integral(0, u) == doctest::Approx(1.0 + 1.0 / 3.0 - 1.0));
}

TEST_CASE("each cell reads its own values and one trace per face") {
  const int k = 2, n = k + 1;
  const RunConfig c = make_cfg(2, 1, k, {3, 3}, {3});
  auto part = make_partitioner(c, make_unit_topology(c));
  AdvectionOperator op(part, c.quadrature, make_operator_options(c), AdvectionField::constant(c.velocity));
  PhaseVector src(part, GhostMode::non_buffered), dst(part, GhostMode::non_buffered);
  src.from_global(random_global_vector(c, 1));
  std::vector<const double*> reads;
  op.set_read_observer([&](const double* p) { reads.push_back(p); });
  part->team().run([&](int rank) {
    OpCounters cnt;
    src.update_ghost_values(rank, &cnt);
    op.apply_ecl(rank, src, dst, cnt);
    src.release(rank);
  });
  const int d = 3, nd = n * n * n, nf = n * n;
  const std::size_t per_cell = nd + 2 * d * nf;
  const auto& topo = part->topology();
  REQUIRE(reads.size() == per_cell * topo.n_cells());
  const double* base = src.owned(0).data();
  for (index_t cell = 0; cell < topo.n_cells(); ++cell) {
    std::set<long> got, expect;
    for (std::size_t r = 0; r < per_cell; ++r) got.insert(reads[cell * per_cell + r] - base);
    for (int i = 0; i < nd; ++i) expect.insert(cell * nd + i);
    const CellPair cp = topo.cell_pair(cell);
    for (int f = 0; f < 2 * d; ++f) {
      const index_t nb = topo.global_index(topo.neighbor(cp, f));
      for (int i : face_dof_indices(d, n, f ^ 1)) expect.insert(nb * nd + i);
    }
    CHECK(got == expect);
    CHECK(got.size() == static_cast<std::size_t>(nd + 2 * d * nf));
  }
}

TEST_CASE("contraction count per cell evaluation") {
  // d to quadrature, d gradient tests, per face d-1 for each of the two
  // traces and one lift, d for the inverse mass; collocation keeps the
  // gradient tests and the lifts
  for (int d : {2, 3, 4, 6}) {
    const auto [dx, dv] = split_dimension(d);
    RunConfig c = make_cfg(dx, dv, 1, std::vector<int>(dx, 2), std::vector<int>(dv, 2));
    const double cells = static_cast<double>(make_unit_topology(c).n_cells());
    const auto r = apply_operator_global(c, random_global_vector(c, 1));
    CHECK(r.counters.contraction_sweeps / cells == doctest::Approx(3.0 * d + 2.0 * d * (2 * d - 1)));
    c.quadrature = QuadratureKind::gauss_lobatto;
    const auto g = apply_operator_global(c, random_global_vector(c, 1));
    CHECK(g.counters.contraction_sweeps / cells == doctest::Approx(3.0 * d));
  }
}

TEST_CASE("counters are deterministic") {
  const RunConfig c = make_cfg(2, 2, 3, {2, 2}, {2, 2});
  const auto x = random_global_vector(c, 1);
  const auto a = apply_operator_global(c, x), b = apply_operator_global(c, x);
  CHECK(a.counters.same_counts(b.counters));
  CHECK(a.output == b.output);
  CHECK(a.counters.flops > 0);
  CHECK(a.counters.dense_fallbacks == 0);
}

TEST_CASE("batched lanes give the same result as single cells") {
  RunConfig c = make_cfg(2, 1, 3, {3, 2}, {3});
  c.deformation = 0.02;
  const auto x = random_global_vector(c, 6);
  const auto one = apply_operator_global(c, x).output;
  for (int v_len : {2, 4, 8}) {
    RunConfig b = c;
    b.v_len = v_len;
    CHECK(max_diff(apply_operator_global(b, x).output, one) < 1e-14);
  }
}

}

TEST_SUITE("sweeps") {

TEST_CASE("one cell evaluation takes about 9d contraction sweeps") {
  for (int d : {2, 4, 6}) {
    const auto [dx, dv] = split_dimension(d);
    RunConfig c = make_cfg(dx, dv, 2, std::vector<int>(dx, 2), std::vector<int>(dv, 2));
    const auto r = apply_operator_global(c, random_global_vector(c, 1));
    const double per_cell = static_cast<double>(r.counters.contraction_sweeps) / make_unit_topology(c).n_cells();
    CHECK_MESSAGE(std::abs(per_cell - 9.0 * d) <= d, "d=" << d << " sweeps per cell " << per_cell);
  }
}

}
