#include "hyperdg/bench.hpp"

#include <unistd.h>

#include <chrono>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hyperdg/metrics.hpp"
#include "hyperdg/operators.hpp"

namespace hyperdg {

std::vector<int> parse_int_range(const std::string& s) {
  auto to_int = [&](const std::string& t) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(t, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != t.size()) throw std::invalid_argument("bad integer list '" + s + "'");
    return v;
  };
  std::vector<int> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const int lo = to_int(s.substr(0, dots)), hi = to_int(s.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("empty range '" + s + "'");
    for (int i = lo; i <= hi; ++i) out.push_back(i);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(item));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::size_t cache_threshold_bytes() {
  long best = 0;
#ifdef _SC_LEVEL2_CACHE_SIZE
  best = std::max(best, sysconf(_SC_LEVEL2_CACHE_SIZE));
#endif
#ifdef _SC_LEVEL1_DCACHE_SIZE
  if (best <= 0) best = sysconf(_SC_LEVEL1_DCACHE_SIZE);
#endif
  return best > 0 ? static_cast<std::size_t>(best) : std::size_t{1} << 20;
}

namespace {

// two full batches at the widest lane count
constexpr index_t min_bench_cells = 16;

}  // namespace

RunConfig sized_config(RunConfig cfg, index_t target_dofs) {
  cfg.subdivisions_x.assign(cfg.d_x, 1);
  cfg.subdivisions_v.assign(cfg.d_v, 1);
  const index_t per_cell = checked_pow(cfg.k + 1, cfg.dim());
  index_t cells = 1;
  int axis = 0;
  while (cells * per_cell < target_dofs || cells < min_bench_cells) {
    if (axis < cfg.d_x) cfg.subdivisions_x[axis] *= 2;
    else cfg.subdivisions_v[axis - cfg.d_x] *= 2;
    cells *= 2;
    axis = (axis + 1) % cfg.dim();
  }
  return cfg;
}

BenchRow bench_operator(const RunConfig& cfg, int min_applications, double min_seconds) {
  cfg.validate();
  auto part = make_partitioner(cfg, make_unit_topology(cfg));
  const AdvectionOperator op(part, cfg.quadrature, make_operator_options(cfg),
                             AdvectionField::constant(cfg.resolved_velocity()));
  PhaseVector src(part, cfg.mode), dst(part, cfg.loop == LoopStrategy::fcl ? GhostMode::buffered : cfg.mode);
  std::vector<double> init(dof_count(part->topology(), cfg.k));
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (auto& x : init) x = dist(rng);
  src.from_global(init);

  const int p = part->n_ranks();
  std::vector<OpCounters> counters(p);
  auto sweep = [&](int n) {
    part->team().run([&](int rank) {
      for (int i = 0; i < n; ++i) {
        src.update_ghost_values(rank, &counters[rank]);
        op.apply(cfg.loop, rank, src, dst, counters[rank]);
        src.release(rank);
      }
    });
  };
  sweep(1);  // warm-up, not counted
  for (auto& c : counters) c = OpCounters{};

  int n = std::max(1, min_applications);
  int done = 0;
  double seconds = 0.0;
  while (true) {
    const auto t0 = std::chrono::steady_clock::now();
    sweep(n);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    done += n;
    if (seconds >= min_seconds) break;
    n = std::max(n, static_cast<int>(done * (min_seconds / std::max(seconds, 1e-6) - 1.0)) + 1);
  }

  BenchRow row;
  row.cfg = cfg;
  row.n_dofs = static_cast<index_t>(init.size());
  row.applications = done;
  row.seconds = seconds;
  for (const auto& c : counters) row.counters += c;
  OpCounters timed = row.counters;
  timed.wall_seconds = seconds;
  row.throughput = throughput(timed);
  row.flops_per_dof = flops_per_dof(row.counters);
  row.modeled_bytes_per_dof = modeled_bytes_per_dof(row.counters);
  row.intensity = arithmetic_intensity(row.counters);
  row.working_set = working_set_bytes(cfg.k, cfg.dim(), cfg.v_len);
  return row;
}

std::vector<BenchRow> run_bench(const BenchOptions& opt) {
  std::vector<BenchRow> rows;
  for (int d : opt.dims)
    for (int k : opt.ks)
      for (int v_len : opt.v_lens)
        for (LoopStrategy loop : opt.loops) {
          RunConfig cfg = opt.base;
          std::tie(cfg.d_x, cfg.d_v) = split_dimension(d);
          cfg.k = k;
          cfg.v_len = v_len;
          cfg.loop = loop;
          if (loop == LoopStrategy::fcl) cfg.mode = GhostMode::buffered;
          cfg.velocity.clear();
          rows.push_back(bench_operator(sized_config(cfg, opt.target_dofs), opt.min_applications, opt.min_seconds));
        }
  return rows;
}

namespace {

const std::vector<std::string> metric_columns = {"n_dofs",        "applications",          "seconds",
                                                 "throughput",    "flops_per_dof",         "modeled_bytes_per_dof",
                                                 "intensity",     "working_set"};

std::string quoted(const std::string& s) {
  return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quotes = false;
  for (char ch : line) {
    if (ch == '"') in_quotes = !in_quotes;
    else if (ch == ',' && !in_quotes) {
      out.push_back(cur);
      cur.clear();
    } else cur += ch;
  }
  if (in_quotes) throw std::invalid_argument("unterminated quote in CSV line");
  out.push_back(cur);
  return out;
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::vector<std::string> bench_csv_columns() {
  std::vector<std::string> cols = config_keys();
  cols.insert(cols.end(), metric_columns.begin(), metric_columns.end());
  return cols;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  const auto cols = bench_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& r : rows) {
    for (const auto& key : config_keys()) os << quoted(config_value(r.cfg, key)) << ",";
    os << r.n_dofs << "," << r.applications << "," << num(r.seconds) << "," << num(r.throughput) << ","
       << num(r.flops_per_dof) << "," << num(r.modeled_bytes_per_dof) << "," << num(r.intensity) << ","
       << num(r.working_set) << "\n";
  }
}

std::vector<BenchRow> read_bench_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty bench CSV");
  const auto header = split_csv(line);
  if (header != bench_csv_columns()) throw std::invalid_argument("unexpected bench CSV header");
  const std::size_t nk = config_keys().size();
  std::vector<BenchRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw std::invalid_argument("bench CSV row has the wrong column count");
    BenchRow r;
    RunConfig cfg;
    cfg.d_x = cfg.d_v = 0;
    for (std::size_t i = 0; i < nk; ++i) cfg.set(header[i], f[i]);
    cfg.validate();
    r.cfg = cfg;
    r.n_dofs = std::stoll(f[nk]);
    r.applications = std::stoi(f[nk + 1]);
    r.seconds = std::stod(f[nk + 2]);
    r.throughput = std::stod(f[nk + 3]);
    r.flops_per_dof = std::stod(f[nk + 4]);
    r.modeled_bytes_per_dof = std::stod(f[nk + 5]);
    r.intensity = std::stod(f[nk + 6]);
    r.working_set = std::stod(f[nk + 7]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace hyperdg
