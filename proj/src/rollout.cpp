#include "mtac/rollout.hpp"

#include "mtac/errors.hpp"

namespace mtac {

RolloutQueue::RolloutQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("RolloutQueue: capacity must be >= 1");
}

bool RolloutQueue::push(Rollout r) {
  std::unique_lock lock(mu_);
  not_full_.wait(lock, [this] { return items_.size() < capacity_ || closed_; });
  if (closed_) return false;
  items_.push_back(std::move(r));
  ++pushed_;
  lock.unlock();
  not_empty_.notify_one();
  return true;
}

std::optional<Rollout> RolloutQueue::pop() {
  std::unique_lock lock(mu_);
  not_empty_.wait(lock, [this] { return !items_.empty() || closed_; });
  if (items_.empty()) return std::nullopt;  // closed and drained
  Rollout r = std::move(items_.front());
  items_.pop_front();
  ++popped_;
  lock.unlock();
  not_full_.notify_one();
  return r;
}

void RolloutQueue::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  not_full_.notify_all();
  not_empty_.notify_all();
}

bool RolloutQueue::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t RolloutQueue::size() const {
  std::lock_guard lock(mu_);
  return items_.size();
}

std::uint64_t RolloutQueue::pushed_count() const {
  std::lock_guard lock(mu_);
  return pushed_;
}

std::uint64_t RolloutQueue::popped_count() const {
  std::lock_guard lock(mu_);
  return popped_;
}

std::size_t RolloutQueue::discard_remaining() {
  std::lock_guard lock(mu_);
  std::size_t n = items_.size();
  items_.clear();
  return n;
}

}  // namespace mtac
