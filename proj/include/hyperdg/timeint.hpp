#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "hyperdg/config.hpp"
#include "hyperdg/counters.hpp"
#include "hyperdg/operators.hpp"
#include "hyperdg/vector.hpp"

namespace hyperdg {

/// 2N-storage explicit Runge-Kutta scheme:
///   g <- a_i g + dt rhs(u, t + c_i dt);  u <- u + b_i g.
struct LSRKScheme {
  std::array<double, 5> a;
  std::array<double, 5> b;
  std::array<double, 5> c;

  int stages() const { return 5; }
  /// Carpenter-Kennedy five-stage fourth-order scheme.
  static const LSRKScheme& rk45();
};

/// Coefficients r_0..r_5 of the stability polynomial R(z) = sum r_j z^j.
std::array<double, 6> stability_polynomial(const LSRKScheme& s);

using VectorRhs = std::function<void(double t, const std::vector<double>& u, std::vector<double>& out)>;

/// One step on plain vectors; g and k are caller-owned scratch of u's size.
void lsrk_step(const LSRKScheme& s, std::vector<double>& u, std::vector<double>& g, std::vector<double>& k,
               double t, double dt, const VectorRhs& rhs);

struct StageRow {
  int step = 0;
  int stage = 0;
  double seconds = 0.0;
  std::uint64_t flops = 0;
  std::uint64_t modeled_bytes = 0;
};

void write_stage_csv(std::ostream& os, const std::vector<StageRow>& rows);

/// rhs(rank, t, u, k, counters): k = M^{-1} A(u). u is ghosted on entry.
using PhaseRhs = std::function<void(int rank, double t, const PhaseVector& u, PhaseVector& k, OpCounters& c)>;

/// One step on the calling rank. Each stage performs exactly one ghost
/// update of u, one rhs evaluation, and the two vector updates.
void lsrk_step(const LSRKScheme& s, int rank, PhaseVector& u, PhaseVector& k, PhaseVector& g, double t, double dt,
               const PhaseRhs& rhs, OpCounters& c, std::vector<StageRow>* rows = nullptr, int step = 0);

/// cfl h / (|a| (k+1)^2), with h the smallest cell width of both meshes.
double cfl_time_step(const TensorTopology& topo, int k, double speed, double cfl);

struct AdvectionResult {
  std::vector<double> initial;
  std::vector<double> final_state;
  double t_end = 0.0;
  double dt = 0.0;
  int n_steps = 0;
  double l2_error = 0.0;      // against the translated initial condition
  double initial_l2_error = 0.0;
  std::vector<double> mass;   // sum of M f after every step (index 0: initial)
  OpCounters counters;
  std::vector<StageRow> stages;
  std::uint64_t vector_allocations = 0;
  std::uint64_t rhs_evaluations = 0;
  std::uint64_t ghost_updates = 0;
};

using InitialCondition = std::function<double(const double* x, const double* v)>;

/// 1 + 0.5 prod_i sin(2 pi z_i) over all d coordinates.
InitialCondition default_advection_initial(int d_x, int d_v);

/// Constant-speed advection on the unit phase space.
AdvectionResult run_advection(const RunConfig& cfg, const InitialCondition& initial = {});

}  // namespace hyperdg
