#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hyperdg/counters.hpp"
#include "hyperdg/mesh.hpp"
#include "hyperdg/partition.hpp"
#include "hyperdg/runtime.hpp"

namespace hyperdg {

enum class GhostMode { buffered, non_buffered };

std::string to_string(GhostMode m);
GhostMode parse_ghost_mode(const std::string& s);

/// Where the trace of a neighbor cell can be found from an owned cell.
struct NeighborRef {
  int owner = 0;                // rank owning the neighbor
  index_t owner_local = 0;      // local index on the owner
  index_t buffered_slot = -1;   // ghost slot in buffered mode (-1: owned here)
  index_t remote_slot = -1;     // ghost slot in non-buffered mode (-1: no slot)
  bool same_domain = true;
};

/// Shared, immutable description of how phase-space cells and ghost faces
/// are distributed over the ranks of a team, plus the team itself.
class Partitioner {
 public:
  Partitioner(TensorTopology topo, PartitionLayout layout, int k);

  const TensorTopology& topology() const { return topo_; }
  const PartitionLayout& layout() const { return layout_; }
  Team& team() const { return *team_; }
  int k() const { return k_; }
  int dim() const { return topo_.dim(); }
  int n_ranks() const { return layout_.n_ranks(); }
  int cell_dofs() const { return cell_dofs_; }
  int face_dofs() const { return face_dofs_; }
  index_t n_owned(int rank) const { return layout_.owned_cell_count(rank); }
  const GhostPlan& plan(int rank) const { return plans_[rank]; }
  const std::vector<int>& domain_group(int rank) const { return domain_groups_[rank]; }
  const NeighborRef& neighbor(int rank, index_t local, int face) const {
    return neighbors_[rank][static_cast<std::size_t>(local) * 2 * dim() + face];
  }
  /// Face of the neighbor cell whose trace is read (the opposite face).
  static int neighbor_face(int face) { return face ^ 1; }

  index_t ghost_faces(int rank, GhostMode mode) const;
  const std::vector<int>& face_indices(int face) const { return face_indices_[face]; }

  /// One directed exchange between an owner and a rank that ghosts its faces.
  struct Transfer {
    int owner = 0;
    int ghoster = 0;
    bool same_domain = true;
    std::vector<index_t> owner_cells;  // local index on the owner
    std::vector<int> owner_faces;      // face of the owner cell
    std::vector<index_t> buffered_slots;
    std::vector<index_t> remote_slots;
  };
  /// Transfers in which `rank` is the owner / the ghoster, ordered by peer.
  const std::vector<const Transfer*>& outgoing(int rank) const { return outgoing_[rank]; }
  const std::vector<const Transfer*>& incoming(int rank) const { return incoming_[rank]; }

 private:
  TensorTopology topo_;
  PartitionLayout layout_;
  std::shared_ptr<Team> team_;
  int k_;
  int cell_dofs_, face_dofs_;
  std::vector<GhostPlan> plans_;
  std::vector<std::vector<int>> domain_groups_;
  std::vector<std::vector<NeighborRef>> neighbors_;
  std::vector<index_t> remote_faces_;
  std::vector<std::vector<int>> face_indices_;
  std::vector<std::unique_ptr<Transfer>> transfers_;
  std::vector<std::vector<const Transfer*>> outgoing_, incoming_;
};

/// Partitioned phase-space DoF vector. Every rank owns the nodal values of
/// its cells (cell-major, (k+1)^d values per cell) and a ghost region of
/// face traces. In non-buffered mode traces owned by a rank of the same
/// shared-memory domain are read in place and get no ghost slot.
///
/// Per-rank protocol: idle -> start -> updating -> finish -> ghosted ->
/// release -> idle. Ghost and peer reads are legal only while ghosted;
/// owned writes are legal only while idle.
class PhaseVector {
 public:
  enum class State { idle, updating, ghosted };

  PhaseVector(std::shared_ptr<const Partitioner> partitioner, GhostMode mode);

  const Partitioner& partitioner() const { return *part_; }
  std::shared_ptr<const Partitioner> partitioner_ptr() const { return part_; }
  GhostMode mode() const { return mode_; }
  State state(int rank) const { return ranks_[rank].state; }
  std::uint64_t epoch(int rank) const { return ranks_[rank].epoch; }

  std::span<const double> owned(int rank) const { return ranks_[rank].owned; }
  std::span<double> owned_mut(int rank);
  std::span<const double> ghosts(int rank) const;
  std::span<double> ghosts_mut(int rank) { return ranks_[rank].ghost; }
  std::size_t ghost_doubles(int rank) const { return ranks_[rank].ghost.size(); }
  std::size_t owned_doubles(int rank) const { return ranks_[rank].owned.size(); }

  const double* cell(int rank, index_t local) const {
    return ranks_[rank].owned.data() + static_cast<std::size_t>(local) * part_->cell_dofs();
  }

  /// Trace of the neighbor across `face` of owned cell `local`. Either a
  /// contiguous face array (ghost slot) or a full neighbor cell from which the
  /// face indices must be selected.
  struct FaceSource {
    const double* data;
    bool full_cell;
  };
  FaceSource face_source(int rank, index_t local, int face) const;

  void update_ghost_values_start(int rank, OpCounters* counters = nullptr);
  void update_ghost_values_finish(int rank, OpCounters* counters = nullptr);
  void update_ghost_values(int rank, OpCounters* counters = nullptr) {
    update_ghost_values_start(rank, counters);
    update_ghost_values_finish(rank, counters);
  }
  /// Ends the ghosted phase. In non-buffered mode this waits until every
  /// peer of the shared domain has stopped reading this rank's values.
  void release(int rank);

  /// Reverse exchange: every ghost slot's content is delivered to the owner
  /// of that face, which receives it through `add(local, face, values)`.
  /// Buffered mode only.
  void compress(int rank, const std::function<void(index_t, int, std::span<const double>)>& add,
                OpCounters* counters = nullptr);

  void read_cell_dofs(int rank, CellPair c, std::span<double> out) const;
  void write_cell_dofs(int rank, CellPair c, std::span<const double> values);
  void read_face_dofs(int rank, CellPair c, int face, std::span<double> out) const;

  /// Whole-vector access from outside a team run.
  std::vector<double> to_global() const;
  void from_global(std::span<const double> values);
  void set_zero();

  /// Number of PhaseVector objects constructed in this process.
  static std::uint64_t allocations();

 private:
  struct RankData {
    std::vector<double> owned;
    std::vector<double> ghost;
    State state = State::idle;
    std::uint64_t epoch = 0;
  };
  void require(int rank, bool ok, const char* what) const;

  std::shared_ptr<const Partitioner> part_;
  GhostMode mode_;
  std::vector<RankData> ranks_;
};

}  // namespace hyperdg
