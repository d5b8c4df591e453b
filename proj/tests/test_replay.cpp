#include <deque>

#include "an2n/replay.hpp"
#include "doctest.h"

using namespace an2n;

namespace {

Transition make_transition(double tag) {
  Transition t;
  t.state = Vector::Constant(2, tag);
  t.action = Vector::Constant(1, tag);
  t.reward = tag;
  t.next_state = Vector::Constant(2, tag + 0.5);
  t.done = false;
  return t;
}

}  // namespace

TEST_CASE("replay: overwrites oldest once full") {
  ReplayBuffer buf(2);
  buf.push(make_transition(1));
  buf.push(make_transition(2));
  buf.push(make_transition(3));
  CHECK(buf.size() == 2);
  CHECK(buf.at(0).reward == 2.0);
  CHECK(buf.at(1).reward == 3.0);
}

TEST_CASE("replay: one-element buffer always returns that element") {
  ReplayBuffer buf(8);
  buf.push(make_transition(7));
  Rng rng(1);
  const auto batch = buf.sample(4, rng);
  CHECK(batch.size() == 4);
  for (const auto& t : batch) CHECK(t.reward == 7.0);
}

TEST_CASE("replay: filling to capacity exactly keeps every element") {
  ReplayBuffer buf(10000);
  for (int i = 0; i < 10000; ++i) buf.push(make_transition(i));
  CHECK(buf.size() == 10000);
  CHECK(buf.at(0).reward == 0.0);       // nothing overwritten yet
  CHECK(buf.at(9999).reward == 9999.0);
}

TEST_CASE("replay: sampling from an empty buffer is rejected") {
  ReplayBuffer buf(4);
  Rng rng(1);
  CHECK_THROWS_AS(buf.sample(1, rng), std::invalid_argument);
}

TEST_CASE("replay: fixed seed gives an identical batch sequence") {
  ReplayBuffer buf(64);
  for (int i = 0; i < 64; ++i) buf.push(make_transition(i));
  Rng a(99), b(99);
  for (int round = 0; round < 10; ++round) {
    const auto batch_a = buf.sample(16, a);
    const auto batch_b = buf.sample(16, b);
    for (std::size_t i = 0; i < batch_a.size(); ++i)
      CHECK(batch_a[i].reward == batch_b[i].reward);
  }
}

TEST_CASE("replay: chi-squared uniformity over 1e5 draws from 10 elements") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) buf.push(make_transition(i));
  Rng rng(2024);
  const int draws = 100000;
  std::vector<long> counts(10, 0);
  const auto batch = buf.sample(draws, rng);
  for (const auto& t : batch) counts[static_cast<int>(t.reward)] += 1;

  const double expected = draws / 10.0;
  double chi2 = 0.0;
  for (long c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // chi-squared critical value, 9 dof, p = 0.001
  CHECK(chi2 < 27.877);
}

TEST_CASE("replay: matches a reference deque model over random op sequences") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t cap = 1 + rng.index(16);
    ReplayBuffer buf(cap);
    std::deque<double> model;
    for (int op = 0; op < 500; ++op) {
      const double tag = static_cast<double>(op);
      buf.push(make_transition(tag));
      model.push_back(tag);
      if (model.size() > cap) model.pop_front();
      REQUIRE(buf.size() == model.size());
    }
    for (std::size_t i = 0; i < model.size(); ++i)
      CHECK(buf.at(i).reward == model[i]);
  }
}

TEST_CASE("trajectory buffer: bounded and rejects malformed trajectories") {
  TrajectoryBuffer buf(2);
  EvalTrajectory t;
  CHECK_THROWS_AS(buf.push(t), std::invalid_argument);  // empty
  t.states = {Vector::Zero(2)};
  t.rewards = {1.0};
  t.final_state = Vector::Zero(2);
  buf.push(t);
  buf.push(t);
  buf.push(t);
  CHECK(buf.size() == 2);
}

TEST_CASE("key-state queue: admits in order, evicts oldest") {
  KeyStateQueue q(2, 5);
  std::vector<KeyStateEntry> three;
  for (int i = 0; i < 3; ++i)
    three.push_back({Vector::Constant(1, i), static_cast<double>(i), 0});
  q.admit(three);
  CHECK(q.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(q.at(i).scored_return == i);

  std::vector<KeyStateEntry> more;
  for (int i = 3; i < 7; ++i)
    more.push_back({Vector::Constant(1, i), static_cast<double>(i), 0});
  q.admit(more);  // 7 total into capacity 5: two oldest evicted
  CHECK(q.size() == 5);
  CHECK(q.at(0).scored_return == 2.0);
  CHECK(q.at(4).scored_return == 6.0);
}

TEST_CASE("key-state queue: shrinking capacity evicts oldest immediately") {
  KeyStateQueue q(2, 10);
  std::vector<KeyStateEntry> ten;
  for (int i = 0; i < 10; ++i)
    ten.push_back({Vector::Constant(1, i), static_cast<double>(i), 0});
  q.admit(ten);
  q.set_capacity(5);
  CHECK(q.current_capacity() == 5);
  CHECK(q.size() == 5);
  CHECK(q.at(0).scored_return == 5.0);

  q.set_capacity(100);  // clamped to k_upper
  CHECK(q.current_capacity() == 10);
  q.set_capacity(0);  // clamped to k_lower
  CHECK(q.current_capacity() == 2);
  CHECK(q.size() == 2);
}
