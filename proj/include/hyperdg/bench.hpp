#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "hyperdg/config.hpp"
#include "hyperdg/counters.hpp"

namespace hyperdg {

/// "2..5" or "1,2,4" (or a single value).
std::vector<int> parse_int_range(const std::string& s);

/// Level-2 cache size reported by the system (level 1 as fallback), 1 MiB when unknown.
std::size_t cache_threshold_bytes();

struct BenchOptions {
  RunConfig base;
  std::vector<int> ks{3};
  std::vector<int> dims{2};
  std::vector<int> v_lens{1};
  std::vector<LoopStrategy> loops{LoopStrategy::ecl};
  index_t target_dofs = 1 << 18;
  double min_seconds = 0.2;
  int min_applications = 3;
};

struct BenchRow {
  RunConfig cfg;
  index_t n_dofs = 0;
  int applications = 0;
  double seconds = 0.0;
  double throughput = 0.0;  // DoF/s
  double flops_per_dof = 0.0;
  double modeled_bytes_per_dof = 0.0;
  double intensity = 0.0;   // FLOP/byte
  double working_set = 0.0; // bytes, v_len (k+1)^d * 8
  OpCounters counters;
};

/// Smallest mesh of cfg's dimensions with at least target DoFs and at least
/// 16 cells; subdivisions are doubled one axis at a time, x axes first.
RunConfig sized_config(RunConfig cfg, index_t target_dofs);

/// Times repeated operator applications on one configuration.
BenchRow bench_operator(const RunConfig& cfg, int min_applications = 3, double min_seconds = 0.2);

/// Every (k, d, v_len, loop) combination, d split as split_dimension(d).
std::vector<BenchRow> run_bench(const BenchOptions& opt);

std::vector<std::string> bench_csv_columns();
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);
/// Parses rows written by write_bench_csv back (counters are not stored).
std::vector<BenchRow> read_bench_csv(std::istream& is);

}  // namespace hyperdg
