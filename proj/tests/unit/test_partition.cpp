#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hyperdg/partition.hpp"

using namespace hyperdg;

namespace {

TensorTopology topo_2d(int nx, int nv) {
  const std::array<int, 1> sx{nx}, sv{nv};
  return TensorTopology(LowDimMesh::unit(1, sx), LowDimMesh::unit(1, sv));
}

}  // namespace

TEST_SUITE("partition") {

TEST_CASE("split_range balances remainders onto the first parts") {
  const auto r = split_range(10, 3);
  REQUIRE(r.size() == 3);
  CHECK(r[0].begin == 0);
  CHECK(r[0].end == 4);
  CHECK(r[1].size() == 3);
  CHECK(r[2].end == 10);
  CHECK_THROWS_AS(split_range(3, 4), std::invalid_argument);
  CHECK_THROWS_AS(split_range(3, 0), std::invalid_argument);
}

TEST_CASE("rank numbering on the process grid") {
  const auto t = topo_2d(12, 8);
  PartitionLayout l(t, 6, 4);
  CHECK(l.rank_of(2, 1) == 8);
  CHECK(l.col_index(8) == 2);
  CHECK(l.row_index(8) == 1);
  CHECK(l.n_ranks() == 24);
}

TEST_CASE("owned blocks tile the mesh exactly once") {
  const auto t = topo_2d(7, 5);
  PartitionLayout l(t, 3, 2);
  std::vector<int> hits(t.n_cells(), 0);
  for (int r = 0; r < l.n_ranks(); ++r) {
    for (index_t i = 0; i < l.owned_cell_count(r); ++i) {
      const CellPair c = l.owned_cell(r, i);
      CHECK(l.owner(c) == r);
      CHECK(l.local_index(r, c) == i);
      ++hits[t.global_index(c)];
    }
  }
  for (int h : hits) CHECK(h == 1);
  CHECK(l.local_index(0, CellPair{6, 4}) == -1);
}

TEST_CASE("row and column groups") {
  const auto t = topo_2d(6, 6);
  PartitionLayout l(t, 3, 2);
  CHECK(l.row_group(4) == std::vector<int>{3, 4, 5});
  CHECK(l.column_group(4) == std::vector<int>{1, 4});
}

TEST_CASE("virtual topology is the identity for one block") {
  const auto p = virtual_topology_renumber(2, 2, {2, 2});
  CHECK(p == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("virtual topology packs blocks along a z-curve") {
  const auto p = virtual_topology_renumber(4, 4, {2, 2});
  // block (0,0) holds ranks 0,1,4,5
  std::set<int> first{p[0], p[1], p[4], p[5]};
  CHECK(first == std::set<int>{0, 1, 2, 3});
  std::set<int> last{p[10], p[11], p[14], p[15]};
  CHECK(last == std::set<int>{12, 13, 14, 15});

  const auto q = virtual_topology_renumber(8, 8, {2, 2});
  // block (2,0) has Morton code 4, so it starts at worker 16
  CHECK(q[0 * 8 + 4] == 16);
  // block (0,2) has Morton code 8
  CHECK(q[4 * 8 + 0] == 32);
  std::vector<int> sorted = q;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> iota(64);
  std::iota(iota.begin(), iota.end(), 0);
  CHECK(sorted == iota);
}

TEST_CASE("virtual topology keeps each node block on consecutive workers") {
  const auto p = virtual_topology_renumber(6, 4, {3, 2});
  for (int bj = 0; bj < 2; ++bj)
    for (int bi = 0; bi < 2; ++bi) {
      std::vector<int> w;
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 3; ++i) w.push_back(p[(bj * 2 + j) * 6 + bi * 3 + i]);
      std::sort(w.begin(), w.end());
      CHECK(w.back() - w.front() == 5);
      CHECK(w.front() % 6 == 0);
    }
  CHECK_THROWS_AS(virtual_topology_renumber(6, 4, {4, 2}), std::invalid_argument);
}

TEST_CASE("shared domains follow the node blocks") {
  const auto t = topo_2d(8, 8);
  PartitionLayout v(t, 4, 4, {2, 2}, true);
  CHECK(v.n_shared_domains() == 4);
  CHECK(v.same_shared_domain(v.rank_of(0, 0), v.rank_of(1, 1)));
  CHECK_FALSE(v.same_shared_domain(v.rank_of(1, 0), v.rank_of(2, 0)));
  PartitionLayout s(t, 4, 4, {2, 2}, false);
  // striped: ranks 0..3 (the first row) form one domain
  CHECK(s.same_shared_domain(0, 3));
  CHECK_FALSE(s.same_shared_domain(0, 4));
  CHECK(s.shared_domain_ranks(1) == std::vector<int>{4, 5, 6, 7});
}

TEST_CASE("layout construction errors") {
  const auto t = topo_2d(4, 2);
  CHECK_THROWS_AS(PartitionLayout(t, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(PartitionLayout(t, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(PartitionLayout(t, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(PartitionLayout(t, 2, 2, {3, 1}), std::invalid_argument);
}

TEST_CASE("single rank has no ghosts") {
  const auto t = topo_2d(4, 4);
  PartitionLayout l(t, 1, 1);
  const auto g = ghost_plan(t, l, 0, 3);
  CHECK(g.faces.empty());
  CHECK(g.total_doubles() == 0);
}

TEST_CASE("ghost plan matches a brute-force face count") {
  const std::array<int, 2> sx{4, 3};
  const std::array<int, 1> sv{4};
  const TensorTopology t(LowDimMesh::unit(2, sx), LowDimMesh::unit(1, sv));
  const int k = 2;
  PartitionLayout l(t, 3, 2, {1, 2});
  for (int r = 0; r < l.n_ranks(); ++r) {
    int expect = 0;
    for (index_t g = 0; g < t.n_cells(); ++g) {
      const CellPair c = t.cell_pair(g);
      if (l.owner(c) != r) continue;
      for (int f = 0; f < 2 * t.dim(); ++f)
        if (l.owner(t.neighbor(c, f)) != r) ++expect;
    }
    const auto plan = ghost_plan(t, l, r, k);
    CHECK(static_cast<int>(plan.faces.size()) == expect);
    CHECK(plan.total_doubles() == expect * 9);
    for (const auto& f : plan.faces) {
      CHECK(f.owner_rank == l.owner(f.cell));
      CHECK(t.neighbor(f.local, f.local_face) == f.cell);
      CHECK(f.face == (f.local_face ^ 1));
      CHECK(f.same_shared_domain == l.same_shared_domain(r, f.owner_rank));
    }
  }
}

TEST_CASE("ghost requests are symmetric between rank pairs") {
  const auto t = topo_2d(9, 6);
  PartitionLayout l(t, 3, 3);
  std::map<std::pair<int, int>, index_t> volume;
  for (int r = 0; r < l.n_ranks(); ++r)
    for (const auto& f : ghost_plan(t, l, r, 1).faces) volume[{r, f.owner_rank}] += f.dof_count;
  for (const auto& [key, v] : volume) CHECK(volume[{key.second, key.first}] == v);
}

TEST_CASE("2x2 checkerboard of an 8x8 mesh ghosts four block edges") {
  const auto t = topo_2d(8, 8);
  PartitionLayout l(t, 2, 2);
  for (int r = 0; r < 4; ++r) CHECK(ghost_plan(t, l, r, 3).faces.size() == 16);
}

TEST_CASE("remote doubles exclude faces owned in the same domain") {
  const auto t = topo_2d(8, 8);
  PartitionLayout l(t, 2, 2, {2, 1});
  const auto plan = ghost_plan(t, l, 0, 1);
  // x-neighbors share the domain, v-neighbors do not
  CHECK(plan.total_doubles() == 32);
  CHECK(plan.remote_doubles() == 16);
}

TEST_CASE("communication estimate stays within its bounds") {
  // layouts that cut every axis; an uncut periodic axis keeps its faces local
  const std::array<int, 1> s8{8};
  const TensorTopology line(LowDimMesh::unit(1, s8), LowDimMesh::unit(1, s8));
  for (auto [px, pv] : {std::pair{2, 2}, std::pair{4, 2}, std::pair{4, 4}}) {
    PartitionLayout l(line, px, pv);
    const auto e = estimate_comm_volume(line, l, 2);
    CHECK(e.ranks.size() == static_cast<std::size_t>(px * pv));
    for (const auto& r : e.ranks) CHECK(r.within_bounds());
    CHECK(static_cast<double>(e.total_counted) >= e.total_lower * (1 - 1e-12));
  }
  const std::array<int, 2> s4{4, 4};
  const TensorTopology square(LowDimMesh::unit(2, s4), LowDimMesh::unit(2, s4));
  PartitionLayout l(square, 8, 8);
  for (const auto& r : estimate_comm_volume(square, l, 1).ranks) CHECK(r.within_bounds());
}

TEST_CASE("an uncut axis can undercut the lower bound") {
  const std::array<int, 1> sx{12}, sv{4};
  const TensorTopology t(LowDimMesh::unit(1, sx), LowDimMesh::unit(1, sv));
  PartitionLayout l(t, 3, 1);
  for (const auto& r : estimate_comm_volume(t, l, 1).ranks) {
    CHECK(r.normalized < r.lower_bound);
    CHECK(r.normalized <= r.upper_bound);
  }
}

TEST_CASE("total lower bound formula") {
  CHECK(total_ghost_lower_bound(2, 1e6, 4) == doctest::Approx(2 * 2 * std::sqrt(4.0) * 1e3));
  const double frac = total_ghost_lower_bound(6, 1e12, 49152) / 1e12;
  CHECK(frac == doctest::Approx(0.726).epsilon(1e-3));
}

TEST_CASE("ghost plan CSV") {
  const auto t = topo_2d(4, 4);
  PartitionLayout l(t, 2, 1);
  std::ostringstream os;
  write_ghost_plan_csv(os, t, ghost_plan(t, l, 0, 1));
  const std::string s = os.str();
  CHECK(s.rfind("rank,owner,cell,face,bytes,shared\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 8);
}

}
