#include "hyperdg/config.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hyperdg/kernels.hpp"
#include "hyperdg/runtime.hpp"

namespace hyperdg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  is >> out;
  if (is.fail() || !is.eof()) throw std::invalid_argument("bad value '" + v + "' for " + key);
  return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& v) {
  std::vector<T> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<T>(key, item));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw std::invalid_argument("bad boolean '" + v + "' for " + key);
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace

int RunConfig::resolved_threads() const { return threads > 0 ? threads : threads_from_env(); }

std::vector<double> RunConfig::resolved_velocity() const {
  if (velocity.empty()) return std::vector<double>(dim(), 1.0);
  return velocity;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument(m); };
  if (d_x < 1 || d_x > 3 || d_v < 1 || d_v > 3) fail("d_x and d_v must be in 1..3");
  if (k < 1) fail("k must be at least 1");
  if (static_cast<int>(subdivisions_x.size()) != d_x) fail("subdivisions_x needs d_x entries");
  if (static_cast<int>(subdivisions_v.size()) != d_v) fail("subdivisions_v needs d_v entries");
  for (int s : subdivisions_x)
    if (s < 1) fail("subdivisions must be positive");
  for (int s : subdivisions_v)
    if (s < 1) fail("subdivisions must be positive");
  if (deformation < 0) fail("deformation amplitude must be non-negative");
  if (!valid_v_len(v_len)) fail("v_len must be 1, 2, 4 or 8");
  if (p_x < 1 || p_v < 1) fail("p_x and p_v must be positive");
  if (node_block.first < 1 || node_block.second < 1 || p_x % node_block.first || p_v % node_block.second)
    fail("node_block must divide the process grid");
  if (loop == LoopStrategy::fcl && mode != GhostMode::buffered) fail("the face-centric loop requires buffered mode");
  if (cfl <= 0 && dt <= 0) fail("either cfl or dt must be positive");
  if (n_steps < 0) fail("n_steps must be non-negative");
  if (t_end < 0) fail("t_end must be non-negative");
  if (threads < 0) fail("threads must be non-negative");
  if (!velocity.empty() && static_cast<int>(velocity.size()) != dim()) fail("velocity needs d components");
  if (kappa <= 0 || v_max <= 0) fail("kappa and v_max must be positive");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "d_x",   "d_v",   "k",        "subdivisions_x", "subdivisions_v", "deformation", "quadrature",
      "flux",  "loop",  "storage",  "v_len",          "p_x",            "p_v",         "node_block",
      "virtual_topology", "mode",   "cfl",            "dt",             "n_steps",     "t_end",
      "seed",  "threads", "velocity", "alpha",        "kappa",          "v_max"};
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "d_x") d_x = parse_number<int>(key, v);
  else if (key == "d_v") d_v = parse_number<int>(key, v);
  else if (key == "k") k = parse_number<int>(key, v);
  else if (key == "subdivisions_x") subdivisions_x = parse_list<int>(key, v);
  else if (key == "subdivisions_v") subdivisions_v = parse_list<int>(key, v);
  else if (key == "deformation") deformation = parse_number<double>(key, v);
  else if (key == "quadrature") quadrature = parse_quadrature_kind(v);
  else if (key == "flux") flux = parse_flux_kind(v);
  else if (key == "loop") loop = parse_loop_strategy(v);
  else if (key == "storage") storage = parse_mapping_storage(v);
  else if (key == "v_len") v_len = parse_number<int>(key, v);
  else if (key == "p_x") p_x = parse_number<int>(key, v);
  else if (key == "p_v") p_v = parse_number<int>(key, v);
  else if (key == "node_block") {
    std::string t = v;
    std::replace(t.begin(), t.end(), 'x', ',');
    const auto b = parse_list<int>(key, t);
    if (b.size() != 2) throw std::invalid_argument("node_block needs two entries");
    node_block = {b[0], b[1]};
  } else if (key == "virtual_topology") virtual_topology = parse_bool(key, v);
  else if (key == "mode") mode = parse_ghost_mode(v);
  else if (key == "cfl") cfl = parse_number<double>(key, v);
  else if (key == "dt") dt = parse_number<double>(key, v);
  else if (key == "n_steps") n_steps = parse_number<int>(key, v);
  else if (key == "t_end") t_end = parse_number<double>(key, v);
  else if (key == "seed") seed = parse_number<unsigned>(key, v);
  else if (key == "threads") threads = parse_number<int>(key, v);
  else if (key == "velocity") velocity = parse_list<double>(key, v);
  else if (key == "alpha") alpha = parse_number<double>(key, v);
  else if (key == "kappa") kappa = parse_number<double>(key, v);
  else if (key == "v_max") v_max = parse_number<double>(key, v);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string config_value(const RunConfig& c, const std::string& key) {
  if (key == "d_x") return std::to_string(c.d_x);
  if (key == "d_v") return std::to_string(c.d_v);
  if (key == "k") return std::to_string(c.k);
  if (key == "subdivisions_x") return join(c.subdivisions_x);
  if (key == "subdivisions_v") return join(c.subdivisions_v);
  if (key == "deformation") return num(c.deformation);
  if (key == "quadrature") return to_string(c.quadrature);
  if (key == "flux") return to_string(c.flux);
  if (key == "loop") return to_string(c.loop);
  if (key == "storage") return to_string(c.storage);
  if (key == "v_len") return std::to_string(c.v_len);
  if (key == "p_x") return std::to_string(c.p_x);
  if (key == "p_v") return std::to_string(c.p_v);
  if (key == "node_block") return std::to_string(c.node_block.first) + "," + std::to_string(c.node_block.second);
  if (key == "virtual_topology") return c.virtual_topology ? "true" : "false";
  if (key == "mode") return to_string(c.mode);
  if (key == "cfl") return num(c.cfl);
  if (key == "dt") return num(c.dt);
  if (key == "n_steps") return std::to_string(c.n_steps);
  if (key == "t_end") return num(c.t_end);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "threads") return std::to_string(c.threads);
  if (key == "velocity") return join(c.velocity);
  if (key == "alpha") return num(c.alpha);
  if (key == "kappa") return num(c.kappa);
  if (key == "v_max") return num(c.v_max);
  throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file '" + path + "'");
  return parse_config(f);
}

void dump_config(std::ostream& os, const RunConfig& cfg) {
  for (const auto& key : config_keys()) os << key << " = " << config_value(cfg, key) << "\n";
}

std::pair<int, int> split_dimension(int d) {
  if (d < 2 || d > 6) throw std::invalid_argument("dimension must be in 2..6");
  return {(d + 1) / 2, d / 2};
}

TensorTopology make_topology(const RunConfig& cfg, std::span<const double> x_lower, std::span<const double> x_upper,
                             std::span<const double> v_lower, std::span<const double> v_upper) {
  cfg.validate();
  const Deformation def = cfg.deformation > 0 ? Deformation::sinusoidal(cfg.deformation) : Deformation::none();
  LowDimMesh mx(cfg.d_x, cfg.subdivisions_x, x_lower, x_upper, def);
  LowDimMesh mv(cfg.d_v, cfg.subdivisions_v, v_lower, v_upper, def);
  return TensorTopology(std::move(mx), std::move(mv));
}

TensorTopology make_unit_topology(const RunConfig& cfg) {
  const std::vector<double> lo(3, 0.0), hi(3, 1.0);
  return make_topology(cfg, {lo.data(), static_cast<std::size_t>(cfg.d_x)},
                       {hi.data(), static_cast<std::size_t>(cfg.d_x)}, {lo.data(), static_cast<std::size_t>(cfg.d_v)},
                       {hi.data(), static_cast<std::size_t>(cfg.d_v)});
}

std::shared_ptr<Partitioner> make_partitioner(const RunConfig& cfg, TensorTopology topo) {
  PartitionLayout layout(topo, cfg.p_x, cfg.p_v, cfg.node_block, cfg.virtual_topology);
  return std::make_shared<Partitioner>(std::move(topo), std::move(layout), cfg.k);
}

OperatorOptions make_operator_options(const RunConfig& cfg) {
  OperatorOptions o;
  o.flux = cfg.flux;
  o.v_len = cfg.v_len;
  o.threads = cfg.resolved_threads();
  o.storage = cfg.storage;
  return o;
}

}  // namespace hyperdg
