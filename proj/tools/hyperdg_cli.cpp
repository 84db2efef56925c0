#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperdg/bench.hpp"
#include "hyperdg/config.hpp"
#include "hyperdg/metrics.hpp"
#include "hyperdg/partition.hpp"
#include "hyperdg/snapshot.hpp"
#include "hyperdg/timeint.hpp"
#include "hyperdg/verify.hpp"
#include "hyperdg/vlasov.hpp"

using namespace hyperdg;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;

  RunConfig load() const {
    RunConfig cfg = file.empty() ? RunConfig{} : load_config(file);
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
  }
};

void add_config_options(CLI::App* app, ConfigArgs& args) {
  app->add_option("-c,--config", args.file, "key = value configuration file");
  app->add_option("-s,--set", args.sets, "override one configuration key (key=value)");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

void save_state(const std::string& path, const RunConfig& cfg, std::vector<double> values) {
  Snapshot s;
  s.d_x = cfg.d_x;
  s.d_v = cfg.d_v;
  s.k = cfg.k;
  s.subdivisions_x = cfg.subdivisions_x;
  s.subdivisions_v = cfg.subdivisions_v;
  s.values = std::move(values);
  save_snapshot(path, s);
}

std::vector<LoopStrategy> parse_loops(const std::string& s) {
  std::vector<LoopStrategy> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(',', start);
    out.push_back(parse_loop_strategy(s.substr(start, end == std::string::npos ? std::string::npos : end - start)));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hyperdg: matrix-free DG solver for high-dimensional advection and Vlasov-Poisson"};
  app.require_subcommand(1);

  ConfigArgs adv_cfg, landau_cfg, bench_cfg, verify_cfg, comm_cfg, dump_cfg;

  auto* adv = app.add_subcommand("run-advection", "constant-speed advection on the unit phase space");
  add_config_options(adv, adv_cfg);
  std::string adv_csv, adv_snapshot;
  adv->add_option("--csv", adv_csv, "per-stage CSV (step,stage,seconds,flops,modeled_bytes)");
  adv->add_option("--snapshot", adv_snapshot, "write the final state");

  auto* landau = app.add_subcommand("landau", "Landau damping run with damping-rate fit");
  add_config_options(landau, landau_cfg);
  std::string landau_csv, landau_snapshot;
  double fit_t_min = 1.0;
  landau->add_option("--csv", landau_csv, "field-energy history CSV (step,t,field_energy,total_mass)");
  landau->add_option("--snapshot", landau_snapshot, "write the final state");
  landau->add_option("--fit-t-min", fit_t_min, "start of the fit window");

  auto* bench = app.add_subcommand("bench", "operator throughput sweep");
  add_config_options(bench, bench_cfg);
  std::string ks = "3", ds = "2", vlens = "1", loops = "ecl", bench_csv;
  double target = 1 << 18, min_seconds = 0.2;
  bench->add_option("--k", ks, "degrees, e.g. 2..5 or 1,3");
  bench->add_option("--d", ds, "total dimensions, e.g. 2..6");
  bench->add_option("--v-len", vlens, "lane widths, e.g. 1,2,4,8");
  bench->add_option("--loop", loops, "ecl, fcl or ecl,fcl");
  bench->add_option("--target-dofs", target, "minimum DoFs per configuration");
  bench->add_option("--min-seconds", min_seconds, "minimum timed duration per configuration");
  bench->add_option("--csv", bench_csv, "output file (default stdout)");

  auto* verify = app.add_subcommand("verify", "oracle checks on a small mesh");
  add_config_options(verify, verify_cfg);

  auto* comm = app.add_subcommand("estimate-comm", "ghost-volume bounds per rank");
  add_config_options(comm, comm_cfg);
  int formula_d = 0;
  double formula_n = 0, formula_p = 0;
  comm->add_option("--formula-d", formula_d, "evaluate the global lower bound for this dimension only");
  comm->add_option("--formula-n", formula_n, "DoFs for --formula-d");
  comm->add_option("--formula-p", formula_p, "ranks for --formula-d");

  auto* dump = app.add_subcommand("dump-config", "print the effective configuration");
  add_config_options(dump, dump_cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, std::cout, std::cerr);
  }

  try {
    std::cout << std::setprecision(10);
    if (*adv) {
      const RunConfig cfg = adv_cfg.load();
      const AdvectionResult r = run_advection(cfg);
      double drift = 0.0;
      for (std::size_t s = 1; s < r.mass.size(); ++s)
        drift = std::max(drift, std::abs(r.mass[s] - r.mass[s - 1]) / std::abs(r.mass[0]));
      std::cout << "steps " << r.n_steps << " dt " << r.dt << " t_end " << r.t_end << "\n"
                << "l2_error " << r.l2_error << " (initial " << r.initial_l2_error << ")\n"
                << "max_mass_drift_per_step " << drift << "\n"
                << "operator_throughput_dofs_per_s " << throughput(r.counters) << "\n";
      if (!adv_csv.empty()) {
        auto f = open_out(adv_csv);
        write_stage_csv(f, r.stages);
      }
      if (!adv_snapshot.empty()) save_state(adv_snapshot, cfg, r.final_state);
    } else if (*landau) {
      const RunConfig cfg = landau_cfg.load();
      const LandauResult r = run_landau(cfg, fit_t_min);
      std::cout << "steps " << r.n_steps << " dt " << r.dt << "\n"
                << "fit gamma " << r.fit.gamma << " omega " << r.fit.omega << " maxima " << r.fit.n_maxima
                << (r.fit.valid ? "" : " (invalid)") << "\n"
                << "dispersion gamma " << r.reference.gamma << " omega " << r.reference.omega << "\n";
      if (!landau_csv.empty()) {
        auto f = open_out(landau_csv);
        write_landau_csv(f, r.rows);
      }
      if (!landau_snapshot.empty()) save_state(landau_snapshot, cfg, r.final_state);
    } else if (*bench) {
      BenchOptions opt;
      opt.base = bench_cfg.load();
      opt.ks = parse_int_range(ks);
      opt.dims = parse_int_range(ds);
      opt.v_lens = parse_int_range(vlens);
      opt.loops = parse_loops(loops);
      opt.target_dofs = static_cast<index_t>(target);
      opt.min_seconds = min_seconds;
      const auto rows = run_bench(opt);
      if (bench_csv.empty()) {
        write_bench_csv(std::cout, rows);
      } else {
        auto f = open_out(bench_csv);
        write_bench_csv(f, rows);
      }
      std::cerr << "cache threshold " << cache_threshold_bytes() << " bytes\n";
    } else if (*verify) {
      const VerifyReport r = run_verify(verify_cfg.load());
      print_report(std::cout, r);
      return r.ok() ? 0 : 1;
    } else if (*comm) {
      if (formula_d > 0) {
        if (formula_n <= 0 || formula_p <= 0) throw std::invalid_argument("--formula-d needs --formula-n and --formula-p");
        const double lower = total_ghost_lower_bound(formula_d, formula_n, formula_p);
        std::cout << "total_lower_bound " << lower << "\nghost_fraction " << lower / formula_n << "\n";
        return 0;
      }
      const RunConfig cfg = comm_cfg.load();
      const auto topo = make_unit_topology(cfg);
      const PartitionLayout layout(topo, cfg.p_x, cfg.p_v, cfg.node_block, cfg.virtual_topology);
      const auto est = estimate_comm_volume(topo, layout, cfg.k);
      std::cout << "rank,owned_cells,ideal_cells,counted_doubles,normalized,lower_bound,upper_bound,within\n";
      for (const auto& r : est.ranks)
        std::cout << r.rank << ',' << r.owned_cells << ',' << r.ideal_cells << ',' << r.counted_doubles << ','
                  << r.normalized << ',' << r.lower_bound << ',' << r.upper_bound << ','
                  << (r.within_bounds() ? 1 : 0) << '\n';
      std::cout << "# n_dofs " << est.n_dofs << " total_counted " << est.total_counted << " total_lower "
                << est.total_lower << "\n";
    } else if (*dump) {
      dump_config(std::cout, dump_cfg.load());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
