#pragma once
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace mtac {

// Fixed-length trajectory segment from one actor. Episodes continue across
// rollout boundaries; a zero discount marks a termination inside the segment.
struct Rollout {
  int task_id = 0;
  int actor_id = 0;
  std::uint64_t params_version = 0;
  int length = 0;
  int obs_dim = 0;
  std::vector<double> observations;   // (length+1) x obs_dim, row t = state before action t
  std::vector<int> actions;           // length
  std::vector<double> rewards;        // length
  std::vector<double> behavior_logp;  // length; log-prob the snapshot assigned to actions[t]
  std::vector<double> discounts;      // length; 0 at terminations, else the task gamma
  std::vector<double> episode_returns;  // discounted returns of episodes finished inside

  std::span<const double> obs_row(int t) const {
    return {observations.data() + static_cast<std::size_t>(t) * obs_dim,
            static_cast<std::size_t>(obs_dim)};
  }
};

// Bounded FIFO, many producers / one consumer. push blocks while full
// (actors back-pressure instead of dropping); pop blocks while empty.
// After close(), push fails and pop drains what is left before returning
// nullopt. Counters support exactly-once accounting.
class RolloutQueue {
 public:
  explicit RolloutQueue(std::size_t capacity);

  bool push(Rollout r);
  std::optional<Rollout> pop();
  void close();

  bool closed() const;
  std::size_t size() const;
  std::uint64_t pushed_count() const;
  std::uint64_t popped_count() const;
  // Empties the queue (post-close shutdown); returns how many were dropped.
  std::size_t discard_remaining();

 private:
  mutable std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<Rollout> items_;
  std::size_t capacity_;
  bool closed_ = false;
  std::uint64_t pushed_ = 0;
  std::uint64_t popped_ = 0;
};

}  // namespace mtac
