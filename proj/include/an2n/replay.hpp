#pragma once

#include <deque>
#include <vector>

#include "an2n/rng.hpp"
#include "an2n/types.hpp"

namespace an2n {

struct Transition {
  Vector state;
  Vector action;
  double reward = 0.0;
  Vector next_state;
  bool done = false;  // true terminal only; horizon truncation stays false
};

/// Fixed-capacity ring of transitions, oldest overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);

  /// n transitions drawn uniformly with replacement.
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;

  std::size_t size() const { return count_; }
  std::size_t capacity() const { return capacity_; }

  /// Logical indexing, oldest first.
  const Transition& at(std::size_t i) const;

 private:
  std::vector<Transition> ring_;
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write slot
  std::size_t count_ = 0;
};

/// One deterministic test rollout: ordered (state, reward) pairs plus the
/// state the episode ended in.
struct EvalTrajectory {
  std::vector<Vector> states;
  std::vector<double> rewards;
  Vector final_state;

  std::size_t length() const { return states.size(); }
  double total_reward() const;
};

/// Bounded store of recent evaluation trajectories.
class TrajectoryBuffer {
 public:
  explicit TrajectoryBuffer(std::size_t capacity);
  void push(EvalTrajectory traj);
  std::size_t size() const { return buf_.size(); }
  const EvalTrajectory& at(std::size_t i) const { return buf_.at(i); }

 private:
  std::deque<EvalTrajectory> buf_;
  std::size_t capacity_;
};

/// A remembered bad state and the n-step return that condemned it.
struct KeyStateEntry {
  Vector state;
  double scored_return = 0.0;
  int epoch = 0;
};

/// Bounded FIFO of key states. Capacity can move within [k_lower, k_upper];
/// shrinking evicts oldest entries immediately.
class KeyStateQueue {
 public:
  KeyStateQueue(std::size_t k_lower, std::size_t k_upper);

  /// Appends candidates in order, evicting oldest entries beyond capacity.
  void admit(const std::vector<KeyStateEntry>& candidates);

  void set_capacity(std::size_t c);  // clamped to [k_lower, k_upper]

  std::size_t size() const { return q_.size(); }
  std::size_t current_capacity() const { return capacity_; }
  std::size_t k_lower() const { return k_lower_; }
  std::size_t k_upper() const { return k_upper_; }
  bool empty() const { return q_.empty(); }

  /// Oldest first.
  const KeyStateEntry& at(std::size_t i) const { return q_.at(i); }

 private:
  std::deque<KeyStateEntry> q_;
  std::size_t k_lower_;
  std::size_t k_upper_;
  std::size_t capacity_;
};

}  // namespace an2n
