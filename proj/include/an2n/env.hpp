#pragma once

#include <memory>
#include <string>

#include "an2n/rng.hpp"
#include "an2n/types.hpp"

namespace an2n {

struct EnvSpec {
  int state_dim = 0;
  int action_dim = 0;
  double action_bound = 0.0;  // symmetric, per dimension
  int max_steps = 0;
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool done = false;       // episode over (terminal condition or step limit)
  bool truncated = false;  // done only because the step limit was hit
};

/// Deterministic continuous-control environment. The transition is a pure
/// function of (state, action); the instance only tracks the step count for
/// horizon truncation between reset() calls.
class Env {
 public:
  virtual ~Env() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Vector reset(Rng& rng) = 0;
  virtual StepResult step(const Vector& state, const Vector& action) = 0;
};

/// name is one of "pendulum", "mcc", "cliff".
std::unique_ptr<Env> make_env(const std::string& name);

}  // namespace an2n
