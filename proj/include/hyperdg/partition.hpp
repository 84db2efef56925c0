#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "hyperdg/mesh.hpp"

namespace hyperdg {

/// Contiguous range [begin, end) of low-dimensional cells.
struct CellRange {
  index_t begin = 0;
  index_t end = 0;
  index_t size() const { return end - begin; }
  bool contains(index_t c) const { return c >= begin && c < end; }
};

/// Split n cells into p contiguous ranges; the first n % p ranges get one
/// extra cell.
std::vector<CellRange> split_range(index_t n, int p);

/// Quasi-checkerboard partition of T_x (x) T_v over a p_x x p_v process grid.
/// Rank (i, j) owns T_x^i (x) T_v^j and has number j*p_x + i.
class PartitionLayout {
 public:
  /// node_block = (b_x, b_v) groups b_x*b_v ranks into one shared-memory
  /// domain. With virtual_topology the blocks are the domains; without it
  /// physical ranks f(i,j) are packed into domains in order (striped).
  PartitionLayout(const TensorTopology& topo, int p_x, int p_v, std::pair<int, int> node_block = {1, 1},
                  bool virtual_topology = true);

  int p_x() const { return p_x_; }
  int p_v() const { return p_v_; }
  int n_ranks() const { return p_x_ * p_v_; }
  std::pair<int, int> node_block() const { return node_block_; }
  bool virtual_topology() const { return virtual_topology_; }

  int rank_of(int i, int j) const { return j * p_x_ + i; }
  int row_index(int rank) const { return rank / p_x_; }   // j
  int col_index(int rank) const { return rank % p_x_; }   // i

  const CellRange& x_owned(int i) const { return x_owned_[i]; }
  const CellRange& v_owned(int j) const { return v_owned_[j]; }
  int x_part_of(index_t cx) const { return x_part_[cx]; }
  int v_part_of(index_t cv) const { return v_part_[cv]; }
  int owner(CellPair c) const { return rank_of(x_part_[c.cx], v_part_[c.cv]); }
  index_t owned_cell_count(int rank) const {
    return x_owned_[col_index(rank)].size() * v_owned_[row_index(rank)].size();
  }

  /// Local index of an owned cell (v-major within the rank's block).
  index_t local_index(int rank, CellPair c) const;
  CellPair owned_cell(int rank, index_t local) const;

  /// Ranks sharing a row (same j) or column (same i), in ascending order.
  std::vector<int> row_group(int rank) const;
  std::vector<int> column_group(int rank) const;

  int shared_domain(int rank) const { return domain_[rank]; }
  int n_shared_domains() const { return n_domains_; }
  std::vector<int> shared_domain_ranks(int domain) const;
  bool same_shared_domain(int a, int b) const { return domain_[a] == domain_[b]; }

 private:
  int p_x_, p_v_;
  std::pair<int, int> node_block_;
  bool virtual_topology_;
  std::vector<CellRange> x_owned_, v_owned_;
  std::vector<int> x_part_, v_part_;
  std::vector<int> domain_;
  int n_domains_ = 1;
};

/// Permutation f(i,j) -> physical worker that packs every b_x x b_v block of
/// the process grid onto consecutive workers, blocks ordered along a z-curve.
std::vector<int> virtual_topology_renumber(int p_x, int p_v, std::pair<int, int> node_block);

/// Morton code with the first coordinate in the low bit.
std::uint64_t morton_code(std::uint32_t a, std::uint32_t b);

struct GhostFace {
  int owner_rank;
  CellPair cell;     // the non-local neighbor cell
  int face;          // face id of `cell` facing the local cell
  CellPair local;    // owned cell that needs it
  int local_face;    // face of the owned cell (face ^ 1)
  index_t dof_count; // (k+1)^(d-1)
  bool same_shared_domain;
};

struct GhostPlan {
  int rank = 0;
  std::vector<GhostFace> faces;

  index_t total_doubles() const;
  index_t remote_doubles() const;
};

GhostPlan ghost_plan(const TensorTopology& topo, const PartitionLayout& layout, int rank, int k);

struct CommVolumeEstimate {
  struct PerRank {
    int rank;
    index_t owned_cells;        // |L_i|
    double ideal_cells;         // |L_i'| = (N/p)/(k+1)^d
    index_t counted_doubles;    // from the ghost plan
    double normalized;          // counted / (2 d (k+1)^(d-1))
    double lower_bound;         // |L_i'|^((d-1)/d)
    double upper_bound;         // |L_i|
    bool within_bounds() const { return normalized >= lower_bound * (1 - 1e-12) && normalized <= upper_bound; }
  };
  std::vector<PerRank> ranks;
  double total_lower;           // 2 d N^((d-1)/d) p^(1/d)
  index_t total_counted;
  index_t n_dofs;
};

CommVolumeEstimate estimate_comm_volume(const TensorTopology& topo, const PartitionLayout& layout, int k);

/// 2 d N^((d-1)/d) p^(1/d): minimal total ghost doubles for hypercube partitions.
double total_ghost_lower_bound(int d, double n_dofs, double p);

/// CSV: rank,owner,cell,face,bytes,shared
void write_ghost_plan_csv(std::ostream& os, const TensorTopology& topo, const GhostPlan& plan);

}  // namespace hyperdg
