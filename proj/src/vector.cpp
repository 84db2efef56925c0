#include "hyperdg/vector.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <stdexcept>
#include <utility>

#include "hyperdg/kernels.hpp"

namespace hyperdg {

namespace {
constexpr int tag_update = 1;
constexpr int tag_compress = 2;
std::atomic<std::uint64_t> allocation_count{0};
}  // namespace

std::string to_string(GhostMode m) { return m == GhostMode::buffered ? "buffered" : "non_buffered"; }

GhostMode parse_ghost_mode(const std::string& s) {
  if (s == "buffered") return GhostMode::buffered;
  if (s == "non_buffered" || s == "non-buffered") return GhostMode::non_buffered;
  throw std::invalid_argument("unknown ghost mode '" + s + "'");
}

Partitioner::Partitioner(TensorTopology topo, PartitionLayout layout, int k)
    : topo_(std::move(topo)),
      layout_(std::move(layout)),
      team_(std::make_shared<Team>(layout_.n_ranks())),
      k_(k) {
  const int d = topo_.dim();
  cell_dofs_ = static_cast<int>(checked_pow(k + 1, d));
  face_dofs_ = static_cast<int>(checked_pow(k + 1, d - 1));
  const int p = layout_.n_ranks();
  for (int f = 0; f < 2 * d; ++f) face_indices_.push_back(face_dof_indices(d, k + 1, f));

  domain_groups_.resize(p);
  for (int r = 0; r < p; ++r) domain_groups_[r] = layout_.shared_domain_ranks(layout_.shared_domain(r));

  plans_.reserve(p);
  for (int r = 0; r < p; ++r) plans_.push_back(ghost_plan(topo_, layout_, r, k));

  std::map<std::pair<int, int>, Transfer*> by_pair;  // (owner, ghoster)
  neighbors_.resize(p);
  remote_faces_.assign(p, 0);
  for (int r = 0; r < p; ++r) {
    const index_t n_local = layout_.owned_cell_count(r);
    auto& nb = neighbors_[r];
    nb.resize(static_cast<std::size_t>(n_local) * 2 * d);
    index_t slot = 0, remote = 0;
    for (index_t l = 0; l < n_local; ++l) {
      const CellPair c = layout_.owned_cell(r, l);
      for (int f = 0; f < 2 * d; ++f) {
        const CellPair n = topo_.neighbor(c, f);
        NeighborRef& ref = nb[static_cast<std::size_t>(l) * 2 * d + f];
        ref.owner = layout_.owner(n);
        ref.owner_local = layout_.local_index(ref.owner, n);
        if (ref.owner == r) continue;
        // same traversal order as ghost_plan
        const GhostFace& g = plans_[r].faces[slot];
        if (!(g.cell == n) || g.face != (f ^ 1)) throw std::logic_error("ghost plan order mismatch");
        ref.same_domain = g.same_shared_domain;
        ref.buffered_slot = slot;
        ref.remote_slot = ref.same_domain ? -1 : remote++;
        auto& t = by_pair[{ref.owner, r}];
        if (!t) {
          transfers_.push_back(std::make_unique<Transfer>());
          t = transfers_.back().get();
          t->owner = ref.owner;
          t->ghoster = r;
          t->same_domain = ref.same_domain;
        }
        t->owner_cells.push_back(ref.owner_local);
        t->owner_faces.push_back(f ^ 1);
        t->buffered_slots.push_back(ref.buffered_slot);
        t->remote_slots.push_back(ref.remote_slot);
        ++slot;
      }
    }
    remote_faces_[r] = remote;
  }
  outgoing_.resize(p);
  incoming_.resize(p);
  for (const auto& [key, t] : by_pair) {
    outgoing_[key.first].push_back(t);
    incoming_[key.second].push_back(t);
  }
  for (auto& v : incoming_)
    std::sort(v.begin(), v.end(), [](const Transfer* a, const Transfer* b) { return a->owner < b->owner; });
}

index_t Partitioner::ghost_faces(int rank, GhostMode mode) const {
  return mode == GhostMode::buffered ? static_cast<index_t>(plans_[rank].faces.size()) : remote_faces_[rank];
}

PhaseVector::PhaseVector(std::shared_ptr<const Partitioner> partitioner, GhostMode mode)
    : part_(std::move(partitioner)), mode_(mode) {
  allocation_count.fetch_add(1, std::memory_order_relaxed);
  const int p = part_->n_ranks();
  ranks_.resize(p);
  for (int r = 0; r < p; ++r) {
    ranks_[r].owned.assign(static_cast<std::size_t>(part_->n_owned(r)) * part_->cell_dofs(), 0.0);
    ranks_[r].ghost.assign(static_cast<std::size_t>(part_->ghost_faces(r, mode)) * part_->face_dofs(), 0.0);
  }
}

void PhaseVector::require([[maybe_unused]] int rank, [[maybe_unused]] bool ok,
                          [[maybe_unused]] const char* what) const {
#if HYPERDG_PROTOCOL_CHECKS
  if (!ok) throw ProtocolError(std::string(what) + " (rank " + std::to_string(rank) + ")");
#endif
}

std::span<double> PhaseVector::owned_mut(int rank) {
  require(rank, ranks_[rank].state == State::idle, "owned write while ghost values are live");
  return ranks_[rank].owned;
}

std::span<const double> PhaseVector::ghosts(int rank) const {
  require(rank, ranks_[rank].state == State::ghosted, "ghost read outside the ghosted phase");
  return ranks_[rank].ghost;
}

PhaseVector::FaceSource PhaseVector::face_source(int rank, index_t local, int face) const {
  const NeighborRef& ref = part_->neighbor(rank, local, face);
  if (ref.owner == rank) return {cell(rank, ref.owner_local), true};
  require(rank, ranks_[rank].state == State::ghosted, "neighbor trace read with stale ghost values");
  const std::size_t fd = part_->face_dofs();
  if (mode_ == GhostMode::buffered) return {ranks_[rank].ghost.data() + ref.buffered_slot * fd, false};
  if (ref.same_domain) return {cell(ref.owner, ref.owner_local), true};
  return {ranks_[rank].ghost.data() + ref.remote_slot * fd, false};
}

void PhaseVector::update_ghost_values_start(int rank, OpCounters* counters) {
  RankData& me = ranks_[rank];
  if (me.state == State::updating) throw ProtocolError("ghost update already pending");
  require(rank, me.state == State::idle, "ghost update started without release");
  const Partitioner& P = *part_;
  Team& team = P.team();
  const int fd = P.face_dofs();
  team.barrier(rank, P.domain_group(rank));
  std::uint64_t moved = 0;
  if (mode_ == GhostMode::buffered) {
    for (const auto* t : P.incoming(rank)) {
      if (!t->same_domain) continue;
      for (std::size_t e = 0; e < t->owner_cells.size(); ++e) {
        const double* src = cell(t->owner, t->owner_cells[e]);
        const auto& idx = P.face_indices(t->owner_faces[e]);
        double* dst = me.ghost.data() + t->buffered_slots[e] * fd;
        for (int i = 0; i < fd; ++i) dst[i] = src[idx[i]];
      }
      moved += t->owner_cells.size() * fd;
    }
  }
  for (const auto* t : P.outgoing(rank)) {
    if (t->same_domain) continue;
    std::vector<double> payload(t->owner_cells.size() * fd);
    for (std::size_t e = 0; e < t->owner_cells.size(); ++e) {
      const double* src = cell(rank, t->owner_cells[e]);
      const auto& idx = P.face_indices(t->owner_faces[e]);
      for (int i = 0; i < fd; ++i) payload[e * fd + i] = src[idx[i]];
    }
    moved += payload.size();
    team.send(rank, t->ghoster, tag_update, std::move(payload));
  }
  me.state = State::updating;
  if (counters) counters->modeled_doubles_moved += moved;
}

void PhaseVector::update_ghost_values_finish(int rank, OpCounters* counters) {
  RankData& me = ranks_[rank];
  if (me.state != State::updating) throw ProtocolError("ghost update finished without start");
  const Partitioner& P = *part_;
  Team& team = P.team();
  const int fd = P.face_dofs();
  std::uint64_t moved = 0;
  for (const auto* t : P.incoming(rank)) {
    if (t->same_domain) continue;
    const std::vector<double> payload = team.recv(rank, t->owner, tag_update);
    if (payload.size() != t->owner_cells.size() * fd) throw ProtocolError("ghost message size mismatch");
    for (std::size_t e = 0; e < t->owner_cells.size(); ++e) {
      const index_t slot = mode_ == GhostMode::buffered ? t->buffered_slots[e] : t->remote_slots[e];
      std::copy_n(payload.data() + e * fd, fd, me.ghost.data() + slot * fd);
    }
    moved += payload.size();
  }
  team.barrier(rank, P.domain_group(rank));
  me.state = State::ghosted;
  ++me.epoch;
  if (counters) {
    counters->ghost_updates += 1;
    counters->modeled_doubles_moved += moved;
  }
}

void PhaseVector::release(int rank) {
  RankData& me = ranks_[rank];
  if (me.state == State::updating) throw ProtocolError("release during a pending ghost update");
  if (me.state == State::idle) return;
  if (mode_ == GhostMode::non_buffered) part_->team().barrier(rank, part_->domain_group(rank));
  me.state = State::idle;
}

void PhaseVector::compress(int rank, const std::function<void(index_t, int, std::span<const double>)>& add,
                           OpCounters* counters) {
  if (mode_ != GhostMode::buffered) throw ProtocolError("compress requires buffered mode");
  RankData& me = ranks_[rank];
  require(rank, me.state == State::idle, "compress while ghost values are live");
  const Partitioner& P = *part_;
  Team& team = P.team();
  const int fd = P.face_dofs();
  team.barrier(rank, P.domain_group(rank));
  std::uint64_t moved = 0;
  for (const auto* t : P.incoming(rank)) {
    if (t->same_domain) continue;
    std::vector<double> payload(t->owner_cells.size() * fd);
    for (std::size_t e = 0; e < t->owner_cells.size(); ++e)
      std::copy_n(me.ghost.data() + t->buffered_slots[e] * fd, fd, payload.data() + e * fd);
    moved += payload.size();
    team.send(rank, t->owner, tag_compress, std::move(payload));
  }
  for (const auto* t : P.outgoing(rank)) {
    if (t->same_domain) {
      const double* g = ranks_[t->ghoster].ghost.data();
      for (std::size_t e = 0; e < t->owner_cells.size(); ++e)
        add(t->owner_cells[e], t->owner_faces[e], {g + t->buffered_slots[e] * fd, static_cast<std::size_t>(fd)});
    } else {
      const std::vector<double> payload = team.recv(rank, t->ghoster, tag_compress);
      if (payload.size() != t->owner_cells.size() * fd) throw ProtocolError("compress message size mismatch");
      for (std::size_t e = 0; e < t->owner_cells.size(); ++e)
        add(t->owner_cells[e], t->owner_faces[e], {payload.data() + e * fd, static_cast<std::size_t>(fd)});
    }
    moved += t->owner_cells.size() * fd;
  }
  team.barrier(rank, P.domain_group(rank));
  if (counters) counters->modeled_doubles_moved += moved;
}

void PhaseVector::read_cell_dofs(int rank, CellPair c, std::span<double> out) const {
  const PartitionLayout& L = part_->layout();
  const int owner = L.owner(c);
  const std::size_t n = part_->cell_dofs();
  if (out.size() < n) throw std::invalid_argument("output buffer too small");
  if (owner != rank) {
    if (mode_ != GhostMode::non_buffered || !L.same_shared_domain(owner, rank))
      throw ProtocolError("cell is not resolvable on this rank");
    require(rank, ranks_[rank].state == State::ghosted, "peer read outside the ghosted phase");
  }
  const double* src = cell(owner, L.local_index(owner, c));
  std::copy_n(src, n, out.begin());
}

void PhaseVector::write_cell_dofs(int rank, CellPair c, std::span<const double> values) {
  const PartitionLayout& L = part_->layout();
  if (L.owner(c) != rank) throw std::invalid_argument("write to a cell not owned by this rank");
  const std::size_t n = part_->cell_dofs();
  if (values.size() != n) throw std::invalid_argument("cell value count mismatch");
  auto own = owned_mut(rank);
  std::copy(values.begin(), values.end(), own.begin() + L.local_index(rank, c) * n);
}

void PhaseVector::read_face_dofs(int rank, CellPair c, int face, std::span<double> out) const {
  const PartitionLayout& L = part_->layout();
  if (L.owner(c) != rank) throw std::invalid_argument("face read from a cell not owned by this rank");
  if (face < 0 || face >= 2 * part_->dim()) throw std::invalid_argument("invalid face id");
  const std::size_t fd = part_->face_dofs();
  if (out.size() < fd) throw std::invalid_argument("output buffer too small");
  const FaceSource src = face_source(rank, L.local_index(rank, c), face);
  if (src.full_cell) {
    const auto& idx = part_->face_indices(face ^ 1);
    for (std::size_t i = 0; i < fd; ++i) out[i] = src.data[idx[i]];
  } else {
    std::copy_n(src.data, fd, out.begin());
  }
}

std::vector<double> PhaseVector::to_global() const {
  const auto& topo = part_->topology();
  const auto& L = part_->layout();
  const std::size_t n = part_->cell_dofs();
  std::vector<double> out(static_cast<std::size_t>(topo.n_cells()) * n);
  for (index_t g = 0; g < topo.n_cells(); ++g) {
    const CellPair c = topo.cell_pair(g);
    const int r = L.owner(c);
    std::copy_n(cell(r, L.local_index(r, c)), n, out.begin() + g * n);
  }
  return out;
}

void PhaseVector::from_global(std::span<const double> values) {
  const auto& topo = part_->topology();
  const auto& L = part_->layout();
  const std::size_t n = part_->cell_dofs();
  if (values.size() != static_cast<std::size_t>(topo.n_cells()) * n)
    throw std::invalid_argument("global vector size mismatch");
  for (auto& r : ranks_) r.state = State::idle;
  for (index_t g = 0; g < topo.n_cells(); ++g) {
    const CellPair c = topo.cell_pair(g);
    const int r = L.owner(c);
    std::copy_n(values.begin() + g * n, n, ranks_[r].owned.begin() + L.local_index(r, c) * n);
  }
}

std::uint64_t PhaseVector::allocations() { return allocation_count.load(); }

void PhaseVector::set_zero() {
  for (auto& r : ranks_) {
    std::fill(r.owned.begin(), r.owned.end(), 0.0);
    std::fill(r.ghost.begin(), r.ghost.end(), 0.0);
    r.state = State::idle;
  }
}

}  // namespace hyperdg
