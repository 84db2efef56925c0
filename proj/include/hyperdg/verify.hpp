#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hyperdg/config.hpp"
#include "hyperdg/counters.hpp"

namespace hyperdg {

struct ApplyResult {
  std::vector<double> output;  // global cell-major order
  OpCounters counters;
};

/// One application of the advection operator (constant field from cfg) to a
/// global vector, on the partition and ghost mode described by cfg.
ApplyResult apply_operator_global(const RunConfig& cfg, const std::vector<double>& input);

/// Deterministic pseudo-random global vector for cfg's mesh.
std::vector<double> random_global_vector(const RunConfig& cfg, unsigned seed);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool ok() const;
};

/// Oracle suites on a small mesh with cfg's dimensions, degree, quadrature,
/// flux and deformation: dense-operator equivalence, ECL vs FCL, partition
/// and ghost-mode invariance, mass conservation, quadrature exactness, time
/// integrator order and the dispersion root residual.
VerifyReport run_verify(const RunConfig& cfg);

void print_report(std::ostream& os, const VerifyReport& r);

}  // namespace hyperdg
