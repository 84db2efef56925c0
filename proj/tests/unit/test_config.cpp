#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "hyperdg/bench.hpp"
#include "hyperdg/config.hpp"
#include "hyperdg/snapshot.hpp"

using namespace hyperdg;

TEST_SUITE("config") {

TEST_CASE("dump and parse round trip") {
  RunConfig c;
  c.d_x = 2;
  c.d_v = 3;
  c.k = 4;
  c.subdivisions_x = {3, 5};
  c.subdivisions_v = {2, 2, 7};
  c.deformation = 0.125;
  c.quadrature = QuadratureKind::gauss_lobatto;
  c.flux = FluxKind::central;
  c.loop = LoopStrategy::fcl;
  c.mode = GhostMode::buffered;
  c.storage = MappingStorage::full_highdim;
  c.v_len = 4;
  c.p_x = 2;
  c.p_v = 4;
  c.node_block = {2, 2};
  c.virtual_topology = false;
  c.dt = 1e-3;
  c.velocity = {1, -2, 0.5, 0.25, 3};
  c.alpha = 0.05;
  std::stringstream ss;
  dump_config(ss, c);
  const RunConfig r = parse_config(ss);
  for (const auto& key : config_keys()) CHECK_MESSAGE(config_value(r, key) == config_value(c, key), key);
}

TEST_CASE("comments, blanks and unknown keys") {
  std::istringstream ok("# comment\n\nk = 5\nsubdivisions_x = 4\n");
  const RunConfig c = parse_config(ok);
  CHECK(c.k == 5);
  CHECK(c.subdivisions_x == std::vector<int>{4});
  std::istringstream bad("colour = blue\n");
  CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);
  std::istringstream junk("k = three\n");
  CHECK_THROWS_AS(parse_config(junk), std::invalid_argument);
}

TEST_CASE("validation") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  c.loop = LoopStrategy::fcl;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.mode = GhostMode::buffered;
  CHECK_NOTHROW(c.validate());
  c.v_len = 3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  RunConfig d;
  d.subdivisions_x = {4, 4};
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  RunConfig e;
  e.p_x = 2;
  e.node_block = {3, 1};
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
}

TEST_CASE("dimension split") {
  CHECK(split_dimension(2) == std::pair{1, 1});
  CHECK(split_dimension(3) == std::pair{2, 1});
  CHECK(split_dimension(6) == std::pair{3, 3});
  CHECK_THROWS_AS(split_dimension(7), std::invalid_argument);
}

TEST_CASE("integer ranges") {
  CHECK(parse_int_range("2..5") == std::vector<int>{2, 3, 4, 5});
  CHECK(parse_int_range("1,2,4") == std::vector<int>{1, 2, 4});
  CHECK(parse_int_range("7") == std::vector<int>{7});
  CHECK_THROWS_AS(parse_int_range("5..2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_int_range("a,b"), std::invalid_argument);
}

TEST_CASE("snapshot round trip") {
  Snapshot s;
  s.d_x = 1;
  s.d_v = 2;
  s.k = 1;
  s.subdivisions_x = {3};
  s.subdivisions_v = {2, 1};
  s.values = {1.5, -2.25, 3e-300, 0.0};
  std::stringstream ss;
  write_snapshot(ss, s);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 8) == std::string("HYPERDG\0", 8));
  const Snapshot r = read_snapshot(ss);
  CHECK(r.d_v == 2);
  CHECK(r.subdivisions_v == s.subdivisions_v);
  CHECK(r.values == s.values);

  std::stringstream broken(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS(read_snapshot(broken));
  std::stringstream wrong("NOTASNAPSHOT....");
  CHECK_THROWS(read_snapshot(wrong));

  const auto path = (std::filesystem::temp_directory_path() / "hyperdg_test.snap").string();
  save_snapshot(path, s);
  CHECK(load_snapshot(path).values == s.values);
  std::remove(path.c_str());
}

TEST_CASE("bench CSV round trip") {
  BenchRow row;
  row.cfg.k = 2;
  row.cfg.velocity = {1.0, 2.0};
  row.n_dofs = 1234;
  row.applications = 5;
  row.seconds = 0.5;
  row.throughput = 12340.0;
  row.flops_per_dof = 33.5;
  row.modeled_bytes_per_dof = 24.0;
  row.intensity = 1.25;
  row.working_set = 72.0;
  std::stringstream ss;
  write_bench_csv(ss, {row, row});
  const auto rows = read_bench_csv(ss);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].cfg.velocity == row.cfg.velocity);
  CHECK(rows[0].n_dofs == 1234);
  CHECK(rows[0].throughput == doctest::Approx(12340.0));
  CHECK(rows[0].working_set == doctest::Approx(72.0));
  std::istringstream bad("k,n_dofs\n1,2\n");
  CHECK_THROWS(read_bench_csv(bad));
}

TEST_CASE("sized configuration reaches the target") {
  RunConfig c;
  c.d_x = 2;
  c.d_v = 1;
  c.k = 3;
  c.subdivisions_x = {1, 1};
  c.subdivisions_v = {1};
  const RunConfig s = sized_config(c, 10000);
  const index_t n = dof_count(make_unit_topology(s), s.k);
  CHECK(n >= 10000);
  CHECK(n < 2 * 10000);
}

TEST_CASE("cache threshold is positive") { CHECK(cache_threshold_bytes() >= 4096u); }

}
