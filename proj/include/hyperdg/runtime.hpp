#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace hyperdg {

/// Thrown in workers blocked on a barrier or mailbox after another worker
/// failed; Team::run rethrows the original error instead.
struct TeamAborted : std::runtime_error {
  TeamAborted() : std::runtime_error("team aborted") {}
};

/// Misuse of the ghost-exchange or team protocol.
struct ProtocolError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Reusable barrier that can be aborted.
class Barrier {
 public:
  explicit Barrier(int n) : n_(n) {}
  void arrive_and_wait(const bool& aborted, std::mutex& m, std::condition_variable& cv);

 private:
  int n_;
  int waiting_ = 0;
  std::uint64_t generation_ = 0;
};

/// A set of logical ranks executed as one thread each. Provides barriers over
/// arbitrary rank groups, point-to-point mailboxes and deterministic group
/// collectives. Collectives must be called by every member of the group.
class Team {
 public:
  explicit Team(int n_ranks);

  int size() const { return n_; }

  /// Runs body(rank) on every rank and joins. The first exception thrown by
  /// any rank is rethrown here after all ranks have stopped.
  void run(const std::function<void(int)>& body);

  /// Barrier over a sorted group of ranks.
  void barrier(int rank, const std::vector<int>& group);
  void barrier_all(int rank);

  void send(int src, int dst, int tag, std::vector<double> payload);
  std::vector<double> recv(int dst, int src, int tag);

  /// In-place element-wise sum over the group, summed in group order so
  /// every member obtains bitwise identical results.
  void allreduce_sum(int rank, const std::vector<int>& group, std::span<double> data);
  /// Concatenation of every member's contribution in group order.
  std::vector<double> allgather(int rank, const std::vector<int>& group, std::span<const double> mine);

 private:
  struct Slot {
    std::vector<const double*> ptr;
    std::vector<std::size_t> len;
  };
  Barrier& barrier_for(const std::vector<int>& group);
  Slot& slot_for(const std::vector<int>& group);
  void check_member(int rank, const std::vector<int>& group) const;

  int n_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool aborted_ = false;
  std::map<std::vector<int>, std::unique_ptr<Barrier>> barriers_;
  std::map<std::vector<int>, Slot> slots_;
  std::map<std::tuple<int, int, int>, std::vector<std::vector<double>>> mail_;
  std::vector<int> all_;
};

/// Number of intra-rank worker threads from HYPERDG_THREADS (default 1).
int threads_from_env();

}  // namespace hyperdg
