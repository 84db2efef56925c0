#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hyperdg/basis.hpp"
#include "hyperdg/mapping.hpp"
#include "hyperdg/operators.hpp"
#include "hyperdg/vector.hpp"

namespace hyperdg {

/// Everything a run needs. Stored as `key = value` lines; lists are comma
/// separated and node_block is written as `bx,bv`.
struct RunConfig {
  int d_x = 1;
  int d_v = 1;
  int k = 3;
  std::vector<int> subdivisions_x{8};
  std::vector<int> subdivisions_v{8};
  double deformation = 0.0;
  QuadratureKind quadrature = QuadratureKind::gauss_legendre;
  FluxKind flux = FluxKind::upwind;
  LoopStrategy loop = LoopStrategy::ecl;
  MappingStorage storage = MappingStorage::tensor_per_space;
  int v_len = 1;
  int p_x = 1;
  int p_v = 1;
  std::pair<int, int> node_block{1, 1};
  bool virtual_topology = true;
  GhostMode mode = GhostMode::non_buffered;
  double cfl = 0.5;
  double dt = 0.0;      // > 0 overrides the cfl rule
  int n_steps = 100;
  double t_end = 0.0;   // > 0 overrides n_steps (dt shrinks to land on t_end)
  unsigned seed = 1;
  int threads = 0;      // intra-rank workers, 0: HYPERDG_THREADS
  std::vector<double> velocity;  // constant advection speed, empty: all ones
  // Landau damping
  double alpha = 0.01;
  double kappa = 0.5;
  double v_max = 6.0;

  int dim() const { return d_x + d_v; }
  int resolved_threads() const;
  std::vector<double> resolved_velocity() const;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;

  /// Sets one field from its textual form.
  void set(const std::string& key, const std::string& value);
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
void dump_config(std::ostream& os, const RunConfig& cfg);
std::string config_value(const RunConfig& cfg, const std::string& key);
const std::vector<std::string>& config_keys();

/// Default split d = d_x + d_v, x-space gets the extra dimension.
std::pair<int, int> split_dimension(int d);

TensorTopology make_topology(const RunConfig& cfg, std::span<const double> x_lower, std::span<const double> x_upper,
                             std::span<const double> v_lower, std::span<const double> v_upper);
/// Unit hypercubes in both spaces.
TensorTopology make_unit_topology(const RunConfig& cfg);
std::shared_ptr<Partitioner> make_partitioner(const RunConfig& cfg, TensorTopology topo);
OperatorOptions make_operator_options(const RunConfig& cfg);

}  // namespace hyperdg
