#pragma once

#include <cstdint>

namespace hyperdg {

/// Software performance counters. Each worker owns one instance; instances
/// are merged with += at the end of a run.
struct OpCounters {
  std::uint64_t flops = 0;
  std::uint64_t modeled_doubles_moved = 0;  // vector + mapping + ghost traffic
  double wall_seconds = 0.0;
  std::uint64_t dofs_processed = 0;
  std::uint64_t flux_evals = 0;          // face visits (one per face and lane)
  std::uint64_t contraction_sweeps = 0;  // contract_dim calls
  std::uint64_t data_sweeps = 0;         // full passes over a cell-sized buffer, read or write
  std::uint64_t ghost_updates = 0;
  std::uint64_t dense_fallbacks = 0;     // contractions with a matrix lacking even-odd symmetry
  std::uint64_t field_lookups = 0;       // electric-field table reads in cell integrals
  std::uint64_t operator_applications = 0;

  OpCounters& operator+=(const OpCounters& o) {
    flops += o.flops;
    modeled_doubles_moved += o.modeled_doubles_moved;
    wall_seconds += o.wall_seconds;
    dofs_processed += o.dofs_processed;
    flux_evals += o.flux_evals;
    contraction_sweeps += o.contraction_sweeps;
    data_sweeps += o.data_sweeps;
    ghost_updates += o.ghost_updates;
    dense_fallbacks += o.dense_fallbacks;
    field_lookups += o.field_lookups;
    operator_applications += o.operator_applications;
    return *this;
  }

  /// Equality of everything except wall time.
  bool same_counts(const OpCounters& o) const {
    return flops == o.flops && modeled_doubles_moved == o.modeled_doubles_moved &&
           dofs_processed == o.dofs_processed && flux_evals == o.flux_evals &&
           contraction_sweeps == o.contraction_sweeps && data_sweeps == o.data_sweeps &&
           ghost_updates == o.ghost_updates && dense_fallbacks == o.dense_fallbacks &&
           field_lookups == o.field_lookups && operator_applications == o.operator_applications;
  }
};

}  // namespace hyperdg
