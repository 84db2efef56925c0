#include "hyperdg/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "hyperdg/basis.hpp"

namespace hyperdg {

double throughput(const OpCounters& c, double renormalization) {
  if (c.dofs_processed == 0) return 0.0;
  if (!(c.wall_seconds > 0)) throw std::invalid_argument("throughput needs a positive wall time");
  return renormalization * static_cast<double>(c.dofs_processed) / c.wall_seconds;
}

double cg_renormalization(int k, int d) {
  if (k < 1 || d < 1) throw std::invalid_argument("invalid degree or dimension");
  return std::pow(static_cast<double>(k) / (k + 1), d);
}

double arithmetic_intensity(const OpCounters& c) {
  if (c.modeled_doubles_moved == 0) throw std::invalid_argument("arithmetic intensity needs modeled traffic");
  return static_cast<double>(c.flops) / (8.0 * static_cast<double>(c.modeled_doubles_moved));
}

double flops_per_dof(const OpCounters& c) {
  if (c.dofs_processed == 0) throw std::invalid_argument("no DoFs processed");
  return static_cast<double>(c.flops) / static_cast<double>(c.dofs_processed);
}

double modeled_bytes_per_dof(const OpCounters& c) {
  if (c.dofs_processed == 0) throw std::invalid_argument("no DoFs processed");
  return 8.0 * static_cast<double>(c.modeled_doubles_moved) / static_cast<double>(c.dofs_processed);
}

std::string to_string(ModelOperation op) {
  return op == ModelOperation::basis_change_sweep ? "basis_change_sweep" : "cell_integrals";
}

ModelOperation parse_model_operation(const std::string& s) {
  if (s == "basis_change_sweep") return ModelOperation::basis_change_sweep;
  if (s == "cell_integrals") return ModelOperation::cell_integrals;
  throw std::invalid_argument("unknown model operation '" + s + "'");
}

double flops_per_dof_model(int k, int d, ModelOperation op) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  const double e = even_odd_flops_model(k);
  switch (op) {
    case ModelOperation::basis_change_sweep:
      return e;
    case ModelOperation::cell_integrals:
      return d * (3.0 * e + 2.0);
  }
  throw std::invalid_argument("unknown model operation");
}

double working_set_bytes(int k, int d, int v_len) { return 8.0 * v_len * std::pow(k + 1.0, d); }

}  // namespace hyperdg
