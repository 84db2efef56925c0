#include "hyperdg/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hyperdg {

std::vector<CellRange> split_range(index_t n, int p) {
  if (p < 1 || p > n) throw std::invalid_argument("cannot split " + std::to_string(n) +
                                                   " cells over " + std::to_string(p) + " parts");
  std::vector<CellRange> r(p);
  const index_t q = n / p, rem = n % p;
  index_t start = 0;
  for (int i = 0; i < p; ++i) {
    const index_t len = q + (i < rem ? 1 : 0);
    r[i] = {start, start + len};
    start += len;
  }
  return r;
}

std::uint64_t morton_code(std::uint32_t a, std::uint32_t b) {
  std::uint64_t code = 0;
  for (int bit = 0; bit < 32; ++bit) {
    code |= static_cast<std::uint64_t>((a >> bit) & 1u) << (2 * bit);
    code |= static_cast<std::uint64_t>((b >> bit) & 1u) << (2 * bit + 1);
  }
  return code;
}

std::vector<int> virtual_topology_renumber(int p_x, int p_v, std::pair<int, int> node_block) {
  const auto [b_x, b_v] = node_block;
  if (b_x < 1 || b_v < 1 || p_x % b_x != 0 || p_v % b_v != 0)
    throw std::invalid_argument("node block must tile the process grid exactly");
  const int n_bx = p_x / b_x, n_bv = p_v / b_v;
  std::vector<int> blocks(static_cast<std::size_t>(n_bx) * n_bv);
  std::iota(blocks.begin(), blocks.end(), 0);
  std::sort(blocks.begin(), blocks.end(), [&](int a, int b) {
    return morton_code(a % n_bx, a / n_bx) < morton_code(b % n_bx, b / n_bx);
  });
  std::vector<int> block_order(blocks.size());
  for (std::size_t pos = 0; pos < blocks.size(); ++pos) block_order[blocks[pos]] = static_cast<int>(pos);

  const int block_size = b_x * b_v;
  std::vector<int> perm(static_cast<std::size_t>(p_x) * p_v);
  for (int j = 0; j < p_v; ++j)
    for (int i = 0; i < p_x; ++i) {
      const int block = (j / b_v) * n_bx + (i / b_x);
      const int offset = (j % b_v) * b_x + (i % b_x);
      perm[j * p_x + i] = block_order[block] * block_size + offset;
    }
  return perm;
}

PartitionLayout::PartitionLayout(const TensorTopology& topo, int p_x, int p_v,
                                 std::pair<int, int> node_block, bool virtual_topology)
    : p_x_(p_x), p_v_(p_v), node_block_(node_block), virtual_topology_(virtual_topology) {
  const index_t ncx = topo.mesh_x().cell_count(), ncv = topo.mesh_v().cell_count();
  if (p_x < 1 || p_v < 1) throw std::invalid_argument("process grid must be at least 1 x 1");
  if (static_cast<index_t>(p_x) * p_v > ncx * ncv)
    throw std::invalid_argument("more ranks than cells");
  if (p_x > ncx || p_v > ncv)
    throw std::invalid_argument("p_x must not exceed |C_x| and p_v must not exceed |C_v|");
  const auto [b_x, b_v] = node_block;
  if (b_x < 1 || b_v < 1 || p_x % b_x != 0 || p_v % b_v != 0)
    throw std::invalid_argument("node block (" + std::to_string(b_x) + "," + std::to_string(b_v) +
                                ") does not divide the process grid");

  x_owned_ = split_range(ncx, p_x);
  v_owned_ = split_range(ncv, p_v);
  x_part_.resize(ncx);
  v_part_.resize(ncv);
  for (int i = 0; i < p_x; ++i)
    for (index_t c = x_owned_[i].begin; c < x_owned_[i].end; ++c) x_part_[c] = i;
  for (int j = 0; j < p_v; ++j)
    for (index_t c = v_owned_[j].begin; c < v_owned_[j].end; ++c) v_part_[c] = j;

  const int block_size = b_x * b_v;
  domain_.resize(n_ranks());
  if (virtual_topology) {
    const auto perm = virtual_topology_renumber(p_x, p_v, node_block);
    for (int r = 0; r < n_ranks(); ++r) domain_[r] = perm[r] / block_size;
  } else {
    for (int r = 0; r < n_ranks(); ++r) domain_[r] = r / block_size;
  }
  n_domains_ = n_ranks() / block_size;
}

index_t PartitionLayout::local_index(int rank, CellPair c) const {
  const auto& xr = x_owned_[col_index(rank)];
  const auto& vr = v_owned_[row_index(rank)];
  if (!xr.contains(c.cx) || !vr.contains(c.cv)) return -1;
  return (c.cv - vr.begin) * xr.size() + (c.cx - xr.begin);
}

CellPair PartitionLayout::owned_cell(int rank, index_t local) const {
  const auto& xr = x_owned_[col_index(rank)];
  const auto& vr = v_owned_[row_index(rank)];
  return {xr.begin + local % xr.size(), vr.begin + local / xr.size()};
}

std::vector<int> PartitionLayout::row_group(int rank) const {
  std::vector<int> g;
  for (int i = 0; i < p_x_; ++i) g.push_back(rank_of(i, row_index(rank)));
  return g;
}

std::vector<int> PartitionLayout::column_group(int rank) const {
  std::vector<int> g;
  for (int j = 0; j < p_v_; ++j) g.push_back(rank_of(col_index(rank), j));
  return g;
}

std::vector<int> PartitionLayout::shared_domain_ranks(int domain) const {
  std::vector<int> g;
  for (int r = 0; r < n_ranks(); ++r)
    if (domain_[r] == domain) g.push_back(r);
  return g;
}

index_t GhostPlan::total_doubles() const {
  index_t s = 0;
  for (const auto& f : faces) s += f.dof_count;
  return s;
}

index_t GhostPlan::remote_doubles() const {
  index_t s = 0;
  for (const auto& f : faces)
    if (!f.same_shared_domain) s += f.dof_count;
  return s;
}

GhostPlan ghost_plan(const TensorTopology& topo, const PartitionLayout& layout, int rank, int k) {
  GhostPlan plan;
  plan.rank = rank;
  const int d = topo.dim();
  const index_t face_dofs = checked_pow(k + 1, d - 1);
  const index_t n_local = layout.owned_cell_count(rank);
  for (index_t l = 0; l < n_local; ++l) {
    const CellPair c = layout.owned_cell(rank, l);
    for (int f = 0; f < 2 * d; ++f) {
      const CellPair nb = topo.neighbor(c, f);
      const int owner = layout.owner(nb);
      if (owner == rank) continue;
      plan.faces.push_back({owner, nb, f ^ 1, c, f, face_dofs, layout.same_shared_domain(owner, rank)});
    }
  }
  return plan;
}

double total_ghost_lower_bound(int d, double n_dofs, double p) {
  return 2.0 * d * std::pow(n_dofs, (d - 1.0) / d) * std::pow(p, 1.0 / d);
}

CommVolumeEstimate estimate_comm_volume(const TensorTopology& topo, const PartitionLayout& layout, int k) {
  CommVolumeEstimate est;
  const int d = topo.dim();
  const double p = layout.n_ranks();
  est.n_dofs = dof_count(topo, k);
  const double cell_dofs = std::pow(k + 1.0, d);
  const double face_norm = 2.0 * d * std::pow(k + 1.0, d - 1);
  est.total_counted = 0;
  for (int r = 0; r < layout.n_ranks(); ++r) {
    const auto plan = ghost_plan(topo, layout, r, k);
    CommVolumeEstimate::PerRank row;
    row.rank = r;
    row.owned_cells = layout.owned_cell_count(r);
    row.ideal_cells = static_cast<double>(est.n_dofs) / p / cell_dofs;
    row.counted_doubles = plan.total_doubles();
    row.normalized = static_cast<double>(row.counted_doubles) / face_norm;
    row.lower_bound = std::pow(row.ideal_cells, (d - 1.0) / d);
    row.upper_bound = static_cast<double>(row.owned_cells);
    est.total_counted += row.counted_doubles;
    est.ranks.push_back(row);
  }
  est.total_lower = total_ghost_lower_bound(d, static_cast<double>(est.n_dofs), p);
  return est;
}

void write_ghost_plan_csv(std::ostream& os, const TensorTopology& topo, const GhostPlan& plan) {
  os << "rank,owner,cell,face,bytes,shared\n";
  for (const auto& f : plan.faces)
    os << plan.rank << ',' << f.owner_rank << ',' << topo.global_index(f.cell) << ',' << f.face << ','
       << f.dof_count * 8 << ',' << (f.same_shared_domain ? 1 : 0) << '\n';
}

}  // namespace hyperdg
