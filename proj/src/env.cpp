#include "an2n/env.hpp"

#include <algorithm>
#include <cmath>

namespace an2n {

namespace {

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Wrap an angle into (-pi, pi].
double wrap_angle(double x) {
  double w = std::fmod(x + M_PI, 2.0 * M_PI);
  if (w <= 0.0) w += 2.0 * M_PI;
  return w - M_PI;
}

void check_action(const EnvSpec& spec, const Vector& action) {
  require(action.size() == spec.action_dim, "env: action dimension mismatch");
  require(action.allFinite(), "env: non-finite action");
}

/// Torque-limited pendulum swing-up. State (cos th, sin th, thdot); cost on
/// the pre-step state and the applied torque; fixed 200-step episodes.
class PendulumEnv final : public Env {
 public:
  const EnvSpec& spec() const override { return spec_; }

  Vector reset(Rng& rng) override {
    steps_ = 0;
    const double theta = rng.uniform(-M_PI, M_PI);
    const double theta_dot = rng.uniform(-1.0, 1.0);
    return emit(theta, theta_dot);
  }

  StepResult step(const Vector& state, const Vector& action) override {
    require(state.size() == spec_.state_dim, "pendulum: state dimension mismatch");
    check_action(spec_, action);
    const double theta = std::atan2(state[1], state[0]);
    const double theta_dot = state[2];
    const double u = clamp(action[0], -spec_.action_bound, spec_.action_bound);

    const double cost = wrap_angle(theta) * wrap_angle(theta) +
                        0.1 * theta_dot * theta_dot + 0.001 * u * u;

    const double new_dot = clamp(
        theta_dot + (3.0 * kG / (2.0 * kL)) * std::sin(theta) * kDt +
            (3.0 / (kM * kL * kL)) * u * kDt,
        -kMaxSpeed, kMaxSpeed);
    const double new_theta = theta + new_dot * kDt;

    StepResult r;
    r.next_state = emit(new_theta, new_dot);
    r.reward = -cost;
    steps_ += 1;
    if (steps_ >= spec_.max_steps) {
      r.done = true;
      r.truncated = true;  // never terminates early
    }
    return r;
  }

 private:
  static Vector emit(double theta, double theta_dot) {
    Vector s(3);
    s << std::cos(theta), std::sin(theta), theta_dot;
    return s;
  }

  static constexpr double kG = 10.0, kM = 1.0, kL = 1.0, kDt = 0.05;
  static constexpr double kMaxSpeed = 8.0;
  EnvSpec spec_{3, 1, 2.0, 200};
  int steps_ = 0;
};

/// Continuous mountain car: underpowered cart climbing out of a valley.
/// Effort cost -0.1 u^2 per step, +100 on reaching the goal position.
class MountainCarEnv final : public Env {
 public:
  const EnvSpec& spec() const override { return spec_; }

  Vector reset(Rng& rng) override {
    steps_ = 0;
    Vector s(2);
    s << rng.uniform(-0.6, -0.4), 0.0;
    return s;
  }

  StepResult step(const Vector& state, const Vector& action) override {
    require(state.size() == spec_.state_dim, "mcc: state dimension mismatch");
    check_action(spec_, action);
    const double u = clamp(action[0], -spec_.action_bound, spec_.action_bound);
    double v = state[1] + 0.0015 * u - 0.0025 * std::cos(3.0 * state[0]);
    v = clamp(v, -kMaxVel, kMaxVel);
    double p = clamp(state[0] + v, kMinPos, kMaxPos);

    StepResult r;
    r.next_state = Vector(2);
    r.next_state << p, v;
    r.reward = -0.1 * u * u;
    steps_ += 1;
    if (p >= kGoal) {
      r.reward += 100.0;
      r.done = true;
    } else if (steps_ >= spec_.max_steps) {
      r.done = true;
      r.truncated = true;
    }
    return r;
  }

 private:
  static constexpr double kMinPos = -1.2, kMaxPos = 0.6;
  static constexpr double kMaxVel = 0.07, kGoal = 0.45;
  EnvSpec spec_{2, 1, 1.0, 999};
  int steps_ = 0;
};

/// 2-D point mass on the unit square with a penalty strip between start and
/// goal. Built so the strip is exactly the low-return region an exploration
/// mechanism should remember.
class CliffFieldEnv final : public Env {
 public:
  const EnvSpec& spec() const override { return spec_; }

  Vector reset(Rng&) override {
    steps_ = 0;
    return Vector::Zero(4);
  }

  StepResult step(const Vector& state, const Vector& action) override {
    require(state.size() == spec_.state_dim, "cliff: state dimension mismatch");
    check_action(spec_, action);
    const double ax = clamp(action[0], -spec_.action_bound, spec_.action_bound);
    const double ay = clamp(action[1], -spec_.action_bound, spec_.action_bound);

    double vx = clamp(state[2] + ax * kDt, -kMaxVel, kMaxVel);
    double vy = clamp(state[3] + ay * kDt, -kMaxVel, kMaxVel);
    double x = clamp(state[0] + vx * kDt, 0.0, 1.0);
    double y = clamp(state[1] + vy * kDt, 0.0, 1.0);

    StepResult r;
    r.next_state = Vector(4);
    r.next_state << x, y, vx, vy;
    steps_ += 1;

    const double dist = std::hypot(x - kGoalX, y - kGoalY);
    if (dist <= kGoalRadius) {
      r.reward = 100.0;
      r.done = true;
      return r;
    }
    if (x >= kStripMinX && x <= kStripMaxX && y <= kStripMaxY)
      r.reward = -10.0;
    else
      r.reward = -0.1 * dist;
    if (steps_ >= spec_.max_steps) {
      r.done = true;
      r.truncated = true;
    }
    return r;
  }

 private:
  static constexpr double kStripMinX = 0.4, kStripMaxX = 0.6, kStripMaxY = 0.5;
  static constexpr double kGoalX = 1.0, kGoalY = 1.0, kGoalRadius = 0.1;
  static constexpr double kDt = 0.05, kMaxVel = 1.0;
  EnvSpec spec_{4, 2, 1.0, 400};
  int steps_ = 0;
};

}  // namespace

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "pendulum") return std::make_unique<PendulumEnv>();
  if (name == "mcc") return std::make_unique<MountainCarEnv>();
  if (name == "cliff") return std::make_unique<CliffFieldEnv>();
  throw std::invalid_argument("make_env: unknown environment '" + name +
                              "' (expected pendulum, mcc or cliff)");
}

}  // namespace an2n
