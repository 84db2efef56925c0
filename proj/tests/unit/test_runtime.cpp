#include <doctest.h>

#include <array>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "hyperdg/partition.hpp"
#include "hyperdg/runtime.hpp"

using namespace hyperdg;

TEST_SUITE("runtime") {

TEST_CASE("every rank runs once") {
  Team team(5);
  std::vector<std::atomic<int>> hits(5);
  team.run([&](int r) { ++hits[r]; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(Team(0), std::invalid_argument);
}

TEST_CASE("two-rank ping") {
  Team team(2);
  std::vector<double> got;
  team.run([&](int r) {
    if (r == 0) {
      team.send(0, 1, 7, {1.0, 2.0, 3.0});
      const auto back = team.recv(0, 1, 8);
      CHECK(back == std::vector<double>{6.0});
    } else {
      got = team.recv(1, 0, 7);
      team.send(1, 0, 8, {got[0] + got[1] + got[2]});
    }
  });
  CHECK(got == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("messages with one tag arrive in order") {
  Team team(2);
  team.run([&](int r) {
    if (r == 0)
      for (int i = 0; i < 10; ++i) team.send(0, 1, 1, {double(i)});
    else
      for (int i = 0; i < 10; ++i) CHECK(team.recv(1, 0, 1)[0] == i);
  });
}

TEST_CASE("allreduce is bitwise identical on every member") {
  Team team(4);
  std::vector<std::array<double, 3>> out(4);
  team.run([&](int r) {
    std::array<double, 3> v{0.1 * (r + 1), 1e16 * (r % 2 ? 1 : -1), 1.0 / (r + 3)};
    team.allreduce_sum(r, {0, 1, 2, 3}, v);
    out[r] = v;
  });
  for (int r = 1; r < 4; ++r) CHECK(out[r] == out[0]);
  CHECK(out[0][0] == doctest::Approx(1.0));
}

TEST_CASE("column group reduction sums a constant p_v times") {
  const std::array<int, 1> sx{6}, sv{4};
  const TensorTopology t(LowDimMesh::unit(1, sx), LowDimMesh::unit(1, sv));
  const PartitionLayout l(t, 3, 4);
  Team team(l.n_ranks());
  std::vector<double> sums(l.n_ranks()), rows(l.n_ranks());
  team.run([&](int r) {
    double v = 2.5;
    team.allreduce_sum(r, l.column_group(r), {&v, 1});
    sums[r] = v;
    double w = 1.0;
    team.allreduce_sum(r, l.row_group(r), {&w, 1});
    rows[r] = w;
  });
  for (double s : sums) CHECK(s == 2.5 * 4);
  for (double s : rows) CHECK(s == 3.0);
}

TEST_CASE("allgather concatenates in group order") {
  Team team(3);
  std::vector<std::vector<double>> out(3);
  team.run([&](int r) {
    std::vector<double> mine(r + 1, double(r));
    out[r] = team.allgather(r, {0, 1, 2}, mine);
  });
  for (const auto& o : out) CHECK(o == std::vector<double>{0, 1, 1, 2, 2, 2});
}

TEST_CASE("barriers over subgroups") {
  Team team(4);
  std::atomic<int> before{0};
  std::vector<int> seen(4);
  team.run([&](int r) {
    ++before;
    team.barrier_all(r);
    seen[r] = before.load();
    const std::vector<int> pair = r < 2 ? std::vector<int>{0, 1} : std::vector<int>{2, 3};
    for (int i = 0; i < 20; ++i) team.barrier(r, pair);
  });
  for (int s : seen) CHECK(s == 4);
}

TEST_CASE("a failing rank aborts the team and its error is rethrown") {
  Team team(3);
  CHECK_THROWS_WITH_AS(team.run([&](int r) {
                         if (r == 1) throw std::runtime_error("boom");
                         team.barrier_all(r);
                       }),
                       "boom", std::runtime_error);
}

TEST_CASE("non-members are rejected") {
  Team team(2);
  CHECK_THROWS_AS(team.run([&](int r) {
                    if (r == 0) team.barrier(0, {1});
                  }),
                  ProtocolError);
}

TEST_CASE("mismatched allreduce lengths are a protocol error") {
  Team team(2);
  CHECK_THROWS_AS(team.run([&](int r) {
                    std::vector<double> v(r + 1, 1.0);
                    team.allreduce_sum(r, {0, 1}, v);
                  }),
                  ProtocolError);
}

TEST_CASE("worker count from the environment") {
  setenv("HYPERDG_THREADS", "3", 1);
  CHECK(threads_from_env() == 3);
  setenv("HYPERDG_THREADS", "zero", 1);
  CHECK_THROWS_AS(threads_from_env(), std::invalid_argument);
  unsetenv("HYPERDG_THREADS");
  CHECK(threads_from_env() == 1);
}

}
