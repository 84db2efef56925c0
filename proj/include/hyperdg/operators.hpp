#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hyperdg/basis.hpp"
#include "hyperdg/counters.hpp"
#include "hyperdg/mapping.hpp"
#include "hyperdg/vector.hpp"

namespace hyperdg {

namespace detail {
struct OperatorWorkspace;
struct LowDimFactors;
}  // namespace detail

enum class FluxKind { central, upwind };
std::string to_string(FluxKind f);
FluxKind parse_flux_kind(const std::string& s);

enum class LoopStrategy { ecl, fcl };
std::string to_string(LoopStrategy s);
LoopStrategy parse_loop_strategy(const std::string& s);

/// a.n (u- + u+)/2, plus |a.n| (u- - u+)/2 for upwind. u- is the interior value.
inline double numerical_flux(double u_minus, double u_plus, double a_dot_n, FluxKind kind) {
  const double c = 0.5 * a_dot_n * (u_minus + u_plus);
  if (kind == FluxKind::central) return c;
  return c + 0.5 * (a_dot_n < 0 ? -a_dot_n : a_dot_n) * (u_minus - u_plus);
}

/// Electric field at the quadrature points of the x-cells. Every rank holds
/// the cells of its x-range, so ranks of one column hold equal copies.
class FieldTable {
 public:
  FieldTable(const PartitionLayout& layout, int dim_x, int points_per_cell);

  int dim_x() const { return dim_x_; }
  int points_per_cell() const { return points_; }
  const CellRange& x_range(int rank) const { return ranges_[rank]; }

  double* cell(int rank, index_t cx) {
    return data_[rank].data() + static_cast<std::size_t>(cx - ranges_[rank].begin) * points_ * dim_x_;
  }
  const double* cell(int rank, index_t cx) const {
    return data_[rank].data() + static_cast<std::size_t>(cx - ranges_[rank].begin) * points_ * dim_x_;
  }
  /// E_m at point q of x-cell cx, read from any rank holding it.
  double value(index_t cx, int q, int m) const;
  std::size_t doubles_per_rank(int rank) const { return data_[rank].size(); }

 private:
  int dim_x_, points_;
  std::vector<CellRange> ranges_;
  std::vector<int> holder_;  // rank holding each x-cell (row 0)
  std::vector<std::vector<double>> data_;
};

/// Advection coefficient: constant, or the Vlasov field a = (v, -E(x)).
struct AdvectionField {
  enum class Kind { constant, phase_space };
  Kind kind = Kind::constant;
  std::vector<double> a;
  std::shared_ptr<const FieldTable> electric;  // null means E = 0

  static AdvectionField constant(std::vector<double> a);
  static AdvectionField phase_space(std::shared_ptr<const FieldTable> e);
};

struct OperatorOptions {
  FluxKind flux = FluxKind::upwind;
  int v_len = 1;
  int threads = 1;
  MappingStorage storage = MappingStorage::tensor_per_space;
  /// false: dst holds the test integrals A(f) instead of M^{-1} A(f)
  bool apply_inverse_mass = true;
  bool cell_terms = true;
  bool face_terms = true;
};

/// Matrix-free DG advection operator on a partitioned phase-space vector.
/// All apply functions are called by the owning rank's thread; each rank
/// touches only its own cells (plus read access through the ghost protocol).
class AdvectionOperator {
 public:
  AdvectionOperator(std::shared_ptr<const Partitioner> partitioner, QuadratureKind quadrature,
                    OperatorOptions options, AdvectionField field);
  ~AdvectionOperator();

  const Basis1D& basis() const { return basis_; }
  const MappingTables& mapping() const { return mapping_; }
  const OperatorOptions& options() const { return opt_; }
  const AdvectionField& field() const { return field_; }
  const Partitioner& partitioner() const { return *part_; }

  /// Replace the field; must not race with apply.
  void set_field(AdvectionField field);

  /// Optional observer called with the address of every vector entry read by
  /// the element-centric loop (instrumentation for dependency regions).
  void set_read_observer(std::function<void(const double*)> observer) { observer_ = std::move(observer); }

  void apply(LoopStrategy loop, int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const;
  void apply_ecl(int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const;
  void apply_fcl(int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const;

  /// dst = M^{-1} src per cell (src may equal dst).
  void inverse_mass(int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const;
  void mass(int rank, const PhaseVector& src, PhaseVector& dst, OpCounters& c) const;

  /// Integral of the discrete function over the owned cells.
  double integral(int rank, const PhaseVector& v) const;
  /// Quadrature L2 projection of f(x, v) onto the owned cells.
  void project(int rank, PhaseVector& dst,
               const std::function<double(const double* x, const double* v)>& f) const;
  /// sum over owned cells of the quadrature L2 error squared.
  double l2_error_squared(int rank, const PhaseVector& u,
                          const std::function<double(const double* x, const double* v)>& f) const;

  /// Physical coordinates of quadrature point q of a low-dim cell.
  const double* x_point(index_t cx, int q) const { return x_points_.data() + (cx * nqx_ + q) * dx_; }
  const double* v_point(index_t cv, int q) const { return v_points_.data() + (cv * nqv_ + q) * dv_; }

  /// Per-batch scratch doubles (cell-sized buffers times lanes).
  std::size_t workspace_doubles() const;

 private:
  using Workspace = detail::OperatorWorkspace;
  using LowDimFactors = detail::LowDimFactors;
  void build_field_factors();
  index_t n_batches(int rank) const;
  int batch_cells(int rank, index_t batch, Workspace& ws) const;
  void for_each_batch(int rank, const std::function<void(Workspace&, OpCounters&, index_t)>& body,
                      OpCounters& c) const;
  void load_factors(int rank, Workspace& ws, int lanes, OpCounters& c) const;
  void gather_cells(int rank, const PhaseVector& src, Workspace& ws, int lanes, OpCounters& c) const;
  void cell_terms(Workspace& ws, OpCounters& c) const;
  void ecl_faces(int rank, const PhaseVector& src, Workspace& ws, int lanes, OpCounters& c) const;
  void finish(Workspace& ws, OpCounters& c) const;
  void scatter(const Workspace& ws, int lanes, double* dst_base, OpCounters& c) const;
  void direction_coefficients(const Workspace& ws, int j, const double* fq, double* t, OpCounters& c) const;
  void face_speed(const Workspace& ws, int face, double* s, OpCounters& c) const;
  void inverse_mass_diag(const Workspace& ws, double* y, OpCounters& c) const;
  double jxw(CellPair c, int q) const;
  Workspace& workspace(int rank, int thread) const;

  std::shared_ptr<const Partitioner> part_;
  Basis1D basis_;
  OperatorOptions opt_;
  AdvectionField field_;
  MappingTables mapping_;
  int d_, dx_, dv_, n_;
  int nd_, nqx_, nqv_, nfd_;
  std::vector<double> x_points_, v_points_;
  std::unique_ptr<LowDimFactors> fx_, fv_;
  std::function<void(const double*)> observer_;
  // face-centric scratch per rank: cell terms and face fluxes
  mutable std::vector<std::vector<double>> fcl_accum_, fcl_flux_;
  mutable std::vector<std::unique_ptr<Workspace>> workspaces_;
  std::vector<std::vector<int>> x_terms_, v_terms_;
  bool curved_ = false;
};

}  // namespace hyperdg
