#include "hyperdg/runtime.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

namespace hyperdg {

void Barrier::arrive_and_wait(const bool& aborted, std::mutex& m, std::condition_variable& cv) {
  std::unique_lock lock(m);
  if (aborted) throw TeamAborted();
  const std::uint64_t gen = generation_;
  if (++waiting_ == n_) {
    waiting_ = 0;
    ++generation_;
    cv.notify_all();
    return;
  }
  cv.wait(lock, [&] { return generation_ != gen || aborted; });
  if (generation_ == gen) throw TeamAborted();
}

Team::Team(int n_ranks) : n_(n_ranks) {
  if (n_ranks < 1) throw std::invalid_argument("team needs at least one rank");
  for (int r = 0; r < n_; ++r) all_.push_back(r);
}

void Team::run(const std::function<void(int)>& body) {
  {
    std::lock_guard lock(mutex_);
    aborted_ = false;
    mail_.clear();
  }
  if (n_ == 1) {
    body(0);
    return;
  }
  std::exception_ptr first;
  std::mutex err_mutex;
  std::vector<std::thread> threads;
  threads.reserve(n_);
  for (int r = 0; r < n_; ++r)
    threads.emplace_back([&, r] {
      try {
        body(r);
      } catch (const TeamAborted&) {
      } catch (...) {
        {
          std::lock_guard g(err_mutex);
          if (!first) first = std::current_exception();
        }
        std::lock_guard lock(mutex_);
        aborted_ = true;
        cv_.notify_all();
      }
    });
  for (auto& t : threads) t.join();
  // barriers may be left half-entered after an abort
  {
    std::lock_guard lock(mutex_);
    if (aborted_) {
      barriers_.clear();
      slots_.clear();
    }
  }
  if (first) std::rethrow_exception(first);
}

void Team::check_member(int rank, const std::vector<int>& group) const {
  if (!std::binary_search(group.begin(), group.end(), rank))
    throw ProtocolError("rank " + std::to_string(rank) + " is not a member of the group");
}

Barrier& Team::barrier_for(const std::vector<int>& group) {
  std::lock_guard lock(mutex_);
  auto& b = barriers_[group];
  if (!b) b = std::make_unique<Barrier>(static_cast<int>(group.size()));
  return *b;
}

Team::Slot& Team::slot_for(const std::vector<int>& group) {
  std::lock_guard lock(mutex_);
  auto& s = slots_[group];
  if (s.ptr.size() != group.size()) {
    s.ptr.assign(group.size(), nullptr);
    s.len.assign(group.size(), 0);
  }
  return s;
}

void Team::barrier(int rank, const std::vector<int>& group) {
  check_member(rank, group);
  if (group.size() <= 1) return;
  barrier_for(group).arrive_and_wait(aborted_, mutex_, cv_);
}

void Team::barrier_all(int rank) { barrier(rank, all_); }

void Team::send(int src, int dst, int tag, std::vector<double> payload) {
  std::lock_guard lock(mutex_);
  if (aborted_) throw TeamAborted();
  mail_[{src, dst, tag}].push_back(std::move(payload));
  cv_.notify_all();
}

std::vector<double> Team::recv(int dst, int src, int tag) {
  std::unique_lock lock(mutex_);
  const auto key = std::make_tuple(src, dst, tag);
  cv_.wait(lock, [&] {
    if (aborted_) return true;
    auto it = mail_.find(key);
    return it != mail_.end() && !it->second.empty();
  });
  if (aborted_) throw TeamAborted();
  auto& q = mail_[key];
  std::vector<double> out = std::move(q.front());
  q.erase(q.begin());
  return out;
}

void Team::allreduce_sum(int rank, const std::vector<int>& group, std::span<double> data) {
  check_member(rank, group);
  if (group.size() == 1) return;
  Slot& s = slot_for(group);
  const auto me = std::lower_bound(group.begin(), group.end(), rank) - group.begin();
  s.ptr[me] = data.data();
  s.len[me] = data.size();
  barrier(rank, group);
  std::vector<double> sum(data.size(), 0.0);
  for (std::size_t m = 0; m < group.size(); ++m) {
    if (s.len[m] != data.size()) throw ProtocolError("allreduce with mismatched lengths");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += s.ptr[m][i];
  }
  barrier(rank, group);
  std::copy(sum.begin(), sum.end(), data.begin());
}

std::vector<double> Team::allgather(int rank, const std::vector<int>& group, std::span<const double> mine) {
  check_member(rank, group);
  if (group.size() == 1) return {mine.begin(), mine.end()};
  Slot& s = slot_for(group);
  const auto me = std::lower_bound(group.begin(), group.end(), rank) - group.begin();
  s.ptr[me] = mine.data();
  s.len[me] = mine.size();
  barrier(rank, group);
  std::vector<double> out;
  for (std::size_t m = 0; m < group.size(); ++m) out.insert(out.end(), s.ptr[m], s.ptr[m] + s.len[m]);
  barrier(rank, group);
  return out;
}

int threads_from_env() {
  const char* s = std::getenv("HYPERDG_THREADS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1 || v > 256) throw std::invalid_argument("HYPERDG_THREADS must be a positive integer");
  return static_cast<int>(v);
}

}  // namespace hyperdg
