#pragma once

#include <vector>

#include "an2n/env.hpp"
#include "an2n/explore.hpp"
#include "an2n/nn.hpp"
#include "an2n/replay.hpp"

namespace an2n {

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.005;
  int batch_size = 128;
  int update_every = 1;  // gradient steps happen every this many env steps
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  std::vector<int> hidden = {64, 64};
  // SAC
  double sac_alpha = 0.2;
  double log_std_min = -20.0;  // clamp on the actor's raw log-std head
  double log_std_max = 2.0;
  double log_std_hard_min = -20.0;  // re-clamp after the variance scaling
  double log_std_hard_max = 2.0;
};

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

/// Training-time interface the harness drives. Exploration enters through a
/// single scalar: a Gaussian noise scale for DDPG, a std-range factor for SAC.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual double exploration_scale(bool is_key, bool an2n_on) const = 0;
  virtual Vector act(const Vector& s, double scale, Rng& rng) = 0;
  virtual Vector act_deterministic(const Vector& s) const = 0;
  virtual UpdateStats update(const std::vector<Transition>& batch, Rng& rng) = 0;
  /// Bootstrap value for trajectory scoring: target critic at the current
  /// policy's action.
  virtual double terminal_value(const Vector& s) const = 0;
};

struct LossAndGrads {
  double value = 0.0;  // loss (critic) or objective (actor)
  GradientBundle grads;
};

// ---- DDPG building blocks (free functions over plain networks) ----

/// y_i = r_i + gamma * (1 - done_i) * Q'(s_{i+1}, mu'(s_{i+1})).
std::vector<double> ddpg_td_target(const Mlp& target_actor,
                                   const Mlp& target_critic,
                                   const std::vector<Transition>& batch,
                                   double gamma);

/// Mean squared TD error and its gradient w.r.t. the critic parameters.
LossAndGrads ddpg_critic_eval(const Mlp& critic,
                              const std::vector<Transition>& batch,
                              const std::vector<double>& targets);

/// Mean of Q(s, mu(s)) and its ascent gradient w.r.t. the actor parameters,
/// chained through the (frozen) critic.
LossAndGrads ddpg_actor_eval(const Mlp& actor, const Mlp& critic,
                             const std::vector<Transition>& batch);

class DdpgAgent final : public Agent {
 public:
  DdpgAgent(const EnvSpec& env, const AgentConfig& cfg, const NoiseTier& tier,
            Rng& init_rng);

  double exploration_scale(bool is_key, bool an2n_on) const override;

  /// clip(mu(s) + scale * N(0, I), +-bound).
  Vector act(const Vector& s, double noise_scale, Rng& rng) override;
  Vector act_deterministic(const Vector& s) const override;

  std::vector<double> td_targets(const std::vector<Transition>& batch) const;
  UpdateStats update(const std::vector<Transition>& batch, Rng& rng) override;
  double terminal_value(const Vector& s) const override;

  Mlp& actor() { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& target_actor() const { return target_actor_; }
  const Mlp& target_critic() const { return target_critic_; }
  const AgentConfig& config() const { return cfg_; }

 private:
  EnvSpec env_;
  AgentConfig cfg_;
  NoiseTier tier_;
  Mlp actor_, critic_, target_actor_, target_critic_;
  AdamState actor_opt_, critic_opt_;
};

// ---- SAC building blocks ----

/// Summed log density of a = bound * tanh(u) with u ~ N(mean, exp(log_std)^2),
/// evaluated at a given pre-squash point u (tanh change of variables included).
double sac_log_prob_presquash(const Vector& u, const Vector& mean,
                              const Vector& log_std, double bound);

/// TD target kernel: r + gamma * (1 - done) * (q_min - alpha * log_prob).
double sac_td_target_value(double reward, bool done, double gamma, double q_min,
                           double alpha, double log_prob);

struct SacActorEval {
  double loss = 0.0;       // mean(alpha * log pi - min_j Q_j)
  double objective = 0.0;  // mean(min_j Q_j - alpha * log pi)
  GradientBundle grads;    // d loss / d actor parameters
};

/// Reparameterized actor loss with frozen standard-normal draws z (one column
/// per sample); the same z makes the loss differentiable in the actor
/// parameters, which is what the finite-difference checks exercise.
SacActorEval sac_actor_eval(const Mlp& actor, const Mlp& critic1,
                            const Mlp& critic2, const AgentConfig& cfg,
                            double action_bound, const Matrix& states,
                            const Matrix& z, bool want_grads = true);

class SacAgent final : public Agent {
 public:
  SacAgent(const EnvSpec& env, const AgentConfig& cfg, const NoiseTier& tier,
           Rng& init_rng);

  double exploration_scale(bool is_key, bool an2n_on) const override;

  struct Sample {
    Vector action;
    double log_prob = 0.0;
  };
  /// Squashed-Gaussian sample; variance_scale multiplies the std inside the
  /// hard log-std range. deterministic returns bound * tanh(mean).
  Sample sample_action(const Vector& s, double variance_scale, Rng& rng,
                       bool deterministic) const;

  Vector act(const Vector& s, double variance_scale, Rng& rng) override;
  Vector act_deterministic(const Vector& s) const override;

  std::vector<double> td_targets(const std::vector<Transition>& batch,
                                 Rng& rng) const;
  UpdateStats update(const std::vector<Transition>& batch, Rng& rng) override;
  double terminal_value(const Vector& s) const override;

  Mlp& actor() { return actor_; }
  Mlp& critic1() { return critic1_; }
  Mlp& critic2() { return critic2_; }
  const Mlp& actor() const { return actor_; }
  const Mlp& critic1() const { return critic1_; }
  const Mlp& critic2() const { return critic2_; }
  const Mlp& target1() const { return target1_; }
  const Mlp& target2() const { return target2_; }
  const AgentConfig& config() const { return cfg_; }

 private:
  EnvSpec env_;
  AgentConfig cfg_;
  NoiseTier tier_;
  Mlp actor_, critic1_, critic2_, target1_, target2_;
  AdamState actor_opt_, critic1_opt_, critic2_opt_;
};

}  // namespace an2n
