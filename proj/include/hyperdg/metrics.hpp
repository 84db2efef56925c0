#pragma once

#include <string>

#include "hyperdg/counters.hpp"

namespace hyperdg {

/// Processed DoFs per second. Returns 0 when nothing was processed.
double throughput(const OpCounters& c, double renormalization = 1.0);

/// k^d / (k+1)^d: makes DG throughput comparable to continuous elements.
double cg_renormalization(int k, int d);

/// FLOPs per byte of modeled traffic (vector, mapping and ghost data).
double arithmetic_intensity(const OpCounters& c);

double flops_per_dof(const OpCounters& c);
double modeled_bytes_per_dof(const OpCounters& c);

enum class ModelOperation { basis_change_sweep, cell_integrals };
std::string to_string(ModelOperation op);
ModelOperation parse_model_operation(const std::string& s);

/// Analytic FLOPs per DoF. basis_change_sweep: one even-odd 1D sweep;
/// cell_integrals: d (3 e + 2) with e the sweep cost.
double flops_per_dof_model(int k, int d, ModelOperation op);

/// Bytes of v_len (k+1)^d coefficients, the per-batch working set.
double working_set_bytes(int k, int d, int v_len);

}  // namespace hyperdg
