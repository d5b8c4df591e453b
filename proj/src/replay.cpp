#include "an2n/replay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace an2n {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "ReplayBuffer: capacity must be positive");
  ring_.reserve(std::min<std::size_t>(capacity, 1 << 20));
}

void ReplayBuffer::push(const Transition& t) {
  require(t.state.size() == t.next_state.size(),
          "ReplayBuffer: state/next_state length mismatch");
  require(std::isfinite(t.reward), "ReplayBuffer: non-finite reward");
  if (count_ < capacity_) {
    ring_.push_back(t);
    count_ += 1;
  } else {
    ring_[head_] = t;
  }
  head_ = (head_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  require(count_ > 0, "ReplayBuffer: cannot sample from an empty buffer");
  std::vector<Transition> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) batch.push_back(ring_[rng.index(count_)]);
  return batch;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  require(i < count_, "ReplayBuffer: index out of range");
  if (count_ < capacity_) return ring_[i];
  return ring_[(head_ + i) % capacity_];
}

double EvalTrajectory::total_reward() const {
  return std::accumulate(rewards.begin(), rewards.end(), 0.0);
}

TrajectoryBuffer::TrajectoryBuffer(std::size_t capacity) : capacity_(capacity) {
  require(capacity > 0, "TrajectoryBuffer: capacity must be positive");
}

void TrajectoryBuffer::push(EvalTrajectory traj) {
  require(!traj.states.empty() && traj.states.size() == traj.rewards.size(),
          "TrajectoryBuffer: trajectory must be nonempty with matching lengths");
  buf_.push_back(std::move(traj));
  while (buf_.size() > capacity_) buf_.pop_front();
}

KeyStateQueue::KeyStateQueue(std::size_t k_lower, std::size_t k_upper)
    : k_lower_(k_lower), k_upper_(k_upper), capacity_(k_upper) {
  require(k_lower >= 1 && k_lower <= k_upper,
          "KeyStateQueue: need 1 <= k_lower <= k_upper");
}

void KeyStateQueue::admit(const std::vector<KeyStateEntry>& candidates) {
  for (const auto& c : candidates) {
    require(std::isfinite(c.scored_return),
            "KeyStateQueue: non-finite scored return");
    q_.push_back(c);
    while (q_.size() > capacity_) q_.pop_front();
  }
}

void KeyStateQueue::set_capacity(std::size_t c) {
  capacity_ = std::clamp(c, k_lower_, k_upper_);
  while (q_.size() > capacity_) q_.pop_front();
}

}  // namespace an2n
