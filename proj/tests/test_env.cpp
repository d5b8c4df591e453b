#include <cmath>

#include "an2n/env.hpp"
#include "doctest.h"

using namespace an2n;

namespace {

Vector pendulum_state(double theta, double theta_dot) {
  Vector s(3);
  s << std::cos(theta), std::sin(theta), theta_dot;
  return s;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("pendulum: reset ranges and unit-norm embedding") {
  auto env = make_env("pendulum");
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vector s = env->reset(rng);
    CHECK(std::abs(s[0] * s[0] + s[1] * s[1] - 1.0) < 1e-12);
    const double theta = std::atan2(s[1], s[0]);
    CHECK(theta >= -M_PI);
    CHECK(theta <= M_PI);
    CHECK(s[2] >= -1.0);
    CHECK(s[2] <= 1.0);
  }
}

TEST_CASE("pendulum: upright rest with zero torque costs nothing") {
  auto env = make_env("pendulum");
  Rng rng(1);
  env->reset(rng);
  const StepResult r = env->step(pendulum_state(0.0, 0.0), vec({0.0}));
  CHECK(r.reward == doctest::Approx(0.0).epsilon(1e-15));
  CHECK_FALSE(r.done);
}

TEST_CASE("pendulum: hanging down costs pi^2") {
  auto env = make_env("pendulum");
  Rng rng(1);
  env->reset(rng);
  const StepResult r = env->step(pendulum_state(M_PI, 0.0), vec({0.0}));
  CHECK(r.reward == doctest::Approx(-M_PI * M_PI).epsilon(1e-12));
}

TEST_CASE("pendulum: dynamics follow the stated update rule") {
  auto env = make_env("pendulum");
  Rng rng(1);
  env->reset(rng);
  const double theta = 0.3, theta_dot = -0.5, u = 1.2;
  const StepResult r = env->step(pendulum_state(theta, theta_dot), vec({u}));

  const double dt = 0.05;
  const double expected_dot =
      theta_dot + (3.0 * 10.0 / 2.0) * std::sin(theta) * dt + 3.0 * u * dt;
  const double expected_theta = theta + expected_dot * dt;
  CHECK(r.next_state[2] == doctest::Approx(expected_dot).epsilon(1e-12));
  CHECK(r.next_state[0] == doctest::Approx(std::cos(expected_theta)).epsilon(1e-12));
  CHECK(r.next_state[1] == doctest::Approx(std::sin(expected_theta)).epsilon(1e-12));
  const double expected_cost =
      theta * theta + 0.1 * theta_dot * theta_dot + 0.001 * u * u;
  CHECK(r.reward == doctest::Approx(-expected_cost).epsilon(1e-12));
}

TEST_CASE("pendulum: angular velocity clamps at +-8") {
  auto env = make_env("pendulum");
  Rng rng(1);
  env->reset(rng);
  Vector s = pendulum_state(M_PI / 2.0, 7.9);
  for (int i = 0; i < 50; ++i) {
    const StepResult r = env->step(s, vec({2.0}));
    CHECK(std::abs(r.next_state[2]) <= 8.0);
    s = r.next_state;
  }
}

TEST_CASE("pendulum: episodes run exactly 200 steps and only truncate") {
  auto env = make_env("pendulum");
  Rng rng(5);
  Vector s = env->reset(rng);
  int steps = 0;
  while (true) {
    const StepResult r = env->step(s, vec({0.5}));
    steps += 1;
    REQUIRE(steps <= 200);
    if (r.done) {
      CHECK(r.truncated);
      break;
    }
    s = r.next_state;
  }
  CHECK(steps == 200);
}

TEST_CASE("env step is bit-identical on repeated calls") {
  for (const char* name : {"pendulum", "mcc", "cliff"}) {
    auto env_a = make_env(name);
    auto env_b = make_env(name);
    Rng rng_a(3), rng_b(3);
    const Vector s = env_a->reset(rng_a);
    const Vector s2 = env_b->reset(rng_b);
    REQUIRE(s == s2);
    Rng action_rng(4);
    const Vector a =
        action_rng.uniform_vector(env_a->spec().action_dim,
                                  -env_a->spec().action_bound,
                                  env_a->spec().action_bound);
    const StepResult ra = env_a->step(s, a);
    const StepResult rb = env_b->step(s2, a);
    CHECK(ra.next_state == rb.next_state);
    CHECK(ra.reward == rb.reward);
    CHECK(ra.done == rb.done);
  }
}

TEST_CASE("env: non-finite actions are rejected") {
  auto env = make_env("pendulum");
  Rng rng(1);
  const Vector s = env->reset(rng);
  CHECK_THROWS_AS(
      env->step(s, vec({std::numeric_limits<double>::quiet_NaN()})),
      std::invalid_argument);
}

TEST_CASE("mountain car: reset range and stated dynamics") {
  auto env = make_env("mcc");
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Vector s = env->reset(rng);
    CHECK(s[0] >= -0.6);
    CHECK(s[0] <= -0.4);
    CHECK(s[1] == 0.0);
  }

  env->reset(rng);
  const double p = -0.5, v = 0.01, u = 0.8;
  const StepResult r = env->step(vec({p, v}), vec({u}));
  const double ev = v + 0.0015 * u - 0.0025 * std::cos(3.0 * p);
  CHECK(r.next_state[1] == doctest::Approx(ev).epsilon(1e-12));
  CHECK(r.next_state[0] == doctest::Approx(p + ev).epsilon(1e-12));
  CHECK(r.reward == doctest::Approx(-0.1 * u * u).epsilon(1e-12));
  CHECK_FALSE(r.done);
}

TEST_CASE("mountain car: state clamps and goal bonus") {
  auto env = make_env("mcc");
  Rng rng(2);
  env->reset(rng);

  // velocity clamp
  StepResult r = env->step(vec({-0.5, 0.069}), vec({1.0}));
  CHECK(r.next_state[1] <= 0.07);

  // position clamp at the left wall
  env->reset(rng);
  r = env->step(vec({-1.199, -0.07}), vec({-1.0}));
  CHECK(r.next_state[0] >= -1.2);

  // reaching the goal terminates with the bonus
  env->reset(rng);
  r = env->step(vec({0.449, 0.07}), vec({1.0}));
  CHECK(r.next_state[0] >= 0.45);
  CHECK(r.done);
  CHECK_FALSE(r.truncated);
  CHECK(r.reward == doctest::Approx(100.0 - 0.1).epsilon(1e-12));
}

TEST_CASE("cliff field: fixed start, strip penalty, goal, distance cost") {
  auto env = make_env("cliff");
  Rng rng(3);
  const Vector s0 = env->reset(rng);
  CHECK(s0 == Vector::Zero(4));

  // Stepping inside the penalty strip: -10 and not terminal.
  StepResult r = env->step(vec({0.5, 0.3, 0.5, 0.0}), vec({0.0, 0.0}));
  CHECK(r.next_state[0] >= 0.4);
  CHECK(r.next_state[0] <= 0.6);
  CHECK(r.next_state[1] <= 0.5);
  CHECK(r.reward == -10.0);
  CHECK_FALSE(r.done);

  // Outside the strip the cost is -0.1 * distance to the goal.
  env->reset(rng);
  r = env->step(vec({0.1, 0.8, 0.0, 0.0}), vec({0.0, 0.0}));
  const double dist = std::hypot(r.next_state[0] - 1.0, r.next_state[1] - 1.0);
  CHECK(r.reward == doctest::Approx(-0.1 * dist).epsilon(1e-12));

  // Goal disc: +100 and terminal.
  env->reset(rng);
  r = env->step(vec({0.95, 0.95, 1.0, 1.0}), vec({0.0, 0.0}));
  CHECK(std::hypot(r.next_state[0] - 1.0, r.next_state[1] - 1.0) <= 0.1);
  CHECK(r.reward == 100.0);
  CHECK(r.done);
  CHECK_FALSE(r.truncated);
}

TEST_CASE("cliff field: walls and velocity clamps hold under random play") {
  auto env = make_env("cliff");
  Rng rng(4);
  Vector s = env->reset(rng);
  int steps = 0;
  while (true) {
    const Vector a = rng.uniform_vector(2, -1.0, 1.0);
    const StepResult r = env->step(s, a);
    steps += 1;
    CHECK(r.next_state[0] >= 0.0);
    CHECK(r.next_state[0] <= 1.0);
    CHECK(r.next_state[1] >= 0.0);
    CHECK(r.next_state[1] <= 1.0);
    CHECK(std::abs(r.next_state[2]) <= 1.0);
    CHECK(std::abs(r.next_state[3]) <= 1.0);
    if (r.done) break;
    s = r.next_state;
    REQUIRE(steps <= 400);
  }
}
