#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <vector>

#include "hyperdg/config.hpp"
#include "hyperdg/dispersion.hpp"
#include "hyperdg/operators.hpp"
#include "hyperdg/poisson.hpp"
#include "hyperdg/timeint.hpp"
#include "hyperdg/vector.hpp"

namespace hyperdg {

/// Vlasov-Poisson system on x in [0, 2 pi / kappa]^d_x, v in [-v_max, v_max]^d_v
/// with a neutralizing background: rho = 1 - int f dv, -lap(phi) = rho,
/// E = -grad(phi), and transport speed a = (v, -E(x)).
///
/// reduce_density, update_field and rhs are collective: every rank of the
/// team calls them inside Team::run.
class VlasovPoisson {
 public:
  explicit VlasovPoisson(const RunConfig& cfg);
  ~VlasovPoisson();

  const RunConfig& config() const { return cfg_; }
  std::shared_ptr<const Partitioner> partitioner() const { return part_; }
  const AdvectionOperator& op() const { return *op_; }
  const FieldTable& field_table() const { return *field_; }
  double x_length() const;

  /// rho at the quadrature points of the rank's x-cells, [cell][q]; equal on
  /// every rank of a column group.
  std::vector<double> reduce_density(int rank, const PhaseVector& f, OpCounters& c) const;
  /// Density, Poisson solve and E at the quadrature points of the rank's x-cells.
  void update_field(int rank, const PhaseVector& f, OpCounters& c);
  /// k = M^{-1} A(f) with the field recomputed from f.
  void rhs(int rank, double t, const PhaseVector& f, PhaseVector& k, OpCounters& c);
  /// 0.5 int |E|^2 dx from the last update_field on this rank.
  double field_energy(int rank) const { return energy_[rank]; }
  /// Poisson solution samples used by the last update (for determinism checks).
  const std::vector<std::complex<double>>& phi_hat(int rank) const { return poisson_[rank].phi_hat(); }

  double initial_value(const double* x, const double* v) const;
  void project_initial(int rank, PhaseVector& f) const;

  /// cfl h / (v_max sqrt(d_v) (k+1)^2) unless cfg.dt is set.
  double time_step() const;

 private:
  RunConfig cfg_;
  std::shared_ptr<Partitioner> part_;
  std::shared_ptr<FieldTable> field_;
  std::unique_ptr<AdvectionOperator> op_;
  std::vector<PeriodicPoisson> poisson_;
  std::vector<double> energy_;
  int nq_ = 0, nqx_ = 0;
  std::vector<double> sample_matrix_;             // (k+1) x n_q, quad values -> cell-centred samples
  std::vector<std::vector<double>> quad_coords_;  // per axis, all x quadrature coordinates
};

struct LandauRow {
  int step = 0;
  double t = 0.0;
  double field_energy = 0.0;
  double total_mass = 0.0;
};

void write_landau_csv(std::ostream& os, const std::vector<LandauRow>& rows);

struct DampingFit {
  double gamma = 0.0;  // amplitude damping rate (energy decays as exp(-2 gamma t))
  double omega = 0.0;  // oscillation frequency of the field amplitude
  int n_maxima = 0;
  bool valid = false;
};

/// Log-linear fit to the local maxima of the field energy within [t_min, t_max].
DampingFit fit_damping(const std::vector<double>& t, const std::vector<double>& energy, double t_min = 0.0,
                       double t_max = std::numeric_limits<double>::infinity());

struct LandauResult {
  std::vector<LandauRow> rows;
  double dt = 0.0;
  int n_steps = 0;
  DampingFit fit;
  LandauRoot reference;
  OpCounters counters;
  std::vector<StageRow> stages;
  std::vector<double> final_state;
};

/// Runs the Landau damping experiment. The step count comes from t_end when
/// it is positive, otherwise from n_steps.
LandauResult run_landau(const RunConfig& cfg, double fit_t_min = 1.0);

}  // namespace hyperdg
