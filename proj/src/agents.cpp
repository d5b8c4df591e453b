#include "an2n/agents.hpp"

#include <algorithm>
#include <cmath>

namespace an2n {

namespace {

Matrix states_matrix(const std::vector<Transition>& batch) {
  Matrix m(batch.front().state.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) m.col(i) = batch[i].state;
  return m;
}

Matrix actions_matrix(const std::vector<Transition>& batch) {
  Matrix m(batch.front().action.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) m.col(i) = batch[i].action;
  return m;
}

Matrix next_states_matrix(const std::vector<Transition>& batch) {
  Matrix m(batch.front().next_state.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) m.col(i) = batch[i].next_state;
  return m;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  Matrix m(top.rows() + bottom.rows(), top.cols());
  m.topRows(top.rows()) = top;
  m.bottomRows(bottom.rows()) = bottom;
  return m;
}

void negate(GradientBundle& g) {
  for (auto& w : g.weight_grads) w = -w;
  for (auto& b : g.bias_grads) b = -b;
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// log(1 - tanh(u)^2), stable for large |u|.
double log_one_minus_tanh_sq(double u) {
  return 2.0 * (std::log(2.0) - u - softplus(-2.0 * u));
}

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

}  // namespace

// ---------------------------------------------------------------- DDPG ----

std::vector<double> ddpg_td_target(const Mlp& target_actor,
                                   const Mlp& target_critic,
                                   const std::vector<Transition>& batch,
                                   double gamma) {
  require(!batch.empty(), "ddpg_td_target: empty batch");
  const Matrix s2 = next_states_matrix(batch);
  const Matrix a2 = forward(target_actor, s2);
  const Matrix q2 = forward(target_critic, vstack(s2, a2));
  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double mask = batch[i].done ? 0.0 : 1.0;
    y[i] = batch[i].reward + gamma * mask * q2(0, i);
  }
  return y;
}

LossAndGrads ddpg_critic_eval(const Mlp& critic,
                              const std::vector<Transition>& batch,
                              const std::vector<double>& targets) {
  require(batch.size() == targets.size(),
          "ddpg_critic_eval: batch/target size mismatch");
  const double n = static_cast<double>(batch.size());
  const Matrix x = vstack(states_matrix(batch), actions_matrix(batch));
  const Matrix q = forward(critic, x);

  double loss = 0.0;
  Matrix g(1, batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double err = q(0, i) - targets[i];
    loss += err * err;
    g(0, i) = 2.0 * err / n;
  }
  LossAndGrads out;
  out.value = loss / n;
  out.grads = backward(critic, x, g).grads;
  return out;
}

LossAndGrads ddpg_actor_eval(const Mlp& actor, const Mlp& critic,
                             const std::vector<Transition>& batch) {
  require(!batch.empty(), "ddpg_actor_eval: empty batch");
  const double n = static_cast<double>(batch.size());
  const Matrix s = states_matrix(batch);
  const Matrix a = forward(actor, s);
  const Matrix x = vstack(s, a);
  const Matrix q = forward(critic, x);

  // dQ/da with weight 1/N per sample, then chained into the actor.
  const Matrix ones = Matrix::Constant(1, s.cols(), 1.0 / n);
  const Matrix dq_dx = backward(critic, x, ones).input_grads;
  const Matrix dq_da = dq_dx.bottomRows(a.rows());

  LossAndGrads out;
  out.value = q.row(0).mean();
  out.grads = backward(actor, s, dq_da).grads;  // ascent direction of mean Q
  return out;
}

DdpgAgent::DdpgAgent(const EnvSpec& env, const AgentConfig& cfg,
                     const NoiseTier& tier, Rng& init_rng)
    : env_(env), cfg_(cfg), tier_(tier) {
  require(cfg.tau > 0.0 && cfg.tau <= 1.0, "DdpgAgent: tau outside (0, 1]");
  std::vector<int> actor_w{env.state_dim};
  actor_w.insert(actor_w.end(), cfg.hidden.begin(), cfg.hidden.end());
  actor_w.push_back(env.action_dim);
  std::vector<int> critic_w{env.state_dim + env.action_dim};
  critic_w.insert(critic_w.end(), cfg.hidden.begin(), cfg.hidden.end());
  critic_w.push_back(1);

  actor_ = make_mlp(actor_w, Hidden::relu, Output::tanh_scaled,
                    env.action_bound, init_rng, 1e-3);
  critic_ = make_mlp(critic_w, Hidden::relu, Output::identity, 1.0, init_rng);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = make_adam(actor_, cfg.actor_lr);
  critic_opt_ = make_adam(critic_, cfg.critic_lr);
}

double DdpgAgent::exploration_scale(bool is_key, bool an2n_on) const {
  GateDecision d;
  d.is_key = an2n_on && is_key;
  return noise_scale_for(d, tier_);
}

Vector DdpgAgent::act(const Vector& s, double noise_scale, Rng& rng) {
  require(noise_scale >= 0.0, "DdpgAgent::act: negative noise scale");
  Vector a = forward(actor_, s) + noise_scale * rng.normal_vector(env_.action_dim);
  return a.cwiseMax(-env_.action_bound).cwiseMin(env_.action_bound);
}

Vector DdpgAgent::act_deterministic(const Vector& s) const {
  Vector a = forward(actor_, s);
  return a.cwiseMax(-env_.action_bound).cwiseMin(env_.action_bound);
}

std::vector<double> DdpgAgent::td_targets(
    const std::vector<Transition>& batch) const {
  return ddpg_td_target(target_actor_, target_critic_, batch, cfg_.gamma);
}

UpdateStats DdpgAgent::update(const std::vector<Transition>& batch, Rng&) {
  require(static_cast<int>(batch.size()) == cfg_.batch_size,
          "DdpgAgent::update: batch size does not match the configured N");
  const std::vector<double> y = td_targets(batch);

  LossAndGrads critic_step = ddpg_critic_eval(critic_, batch, y);
  if (!std::isfinite(critic_step.value))
    throw std::runtime_error("DdpgAgent::update: non-finite critic loss");
  adam_step(critic_, critic_step.grads, critic_opt_);

  LossAndGrads actor_step = ddpg_actor_eval(actor_, critic_, batch);
  if (!std::isfinite(actor_step.value))
    throw std::runtime_error("DdpgAgent::update: non-finite actor objective");
  negate(actor_step.grads);  // Adam minimizes; ascend mean Q
  adam_step(actor_, actor_step.grads, actor_opt_);

  soft_update(target_actor_, actor_, cfg_.tau);
  soft_update(target_critic_, critic_, cfg_.tau);
  return {critic_step.value, actor_step.value};
}

double DdpgAgent::terminal_value(const Vector& s) const {
  const Vector a = act_deterministic(s);
  Vector x(s.size() + a.size());
  x << s, a;
  return forward(target_critic_, x)[0];
}

// ----------------------------------------------------------------- SAC ----

double sac_log_prob_presquash(const Vector& u, const Vector& mean,
                              const Vector& log_std, double bound) {
  require(u.size() == mean.size() && u.size() == log_std.size(),
          "sac_log_prob_presquash: length mismatch");
  double lp = 0.0;
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    const double sigma = std::exp(log_std[k]);
    const double zk = (u[k] - mean[k]) / sigma;
    lp += -log_std[k] - kHalfLog2Pi - 0.5 * zk * zk;       // Gaussian in u
    lp -= std::log(bound) + log_one_minus_tanh_sq(u[k]);   // da/du Jacobian
  }
  return lp;
}

double sac_td_target_value(double reward, bool done, double gamma, double q_min,
                           double alpha, double log_prob) {
  const double mask = done ? 0.0 : 1.0;
  return reward + gamma * mask * (q_min - alpha * log_prob);
}

SacActorEval sac_actor_eval(const Mlp& actor, const Mlp& critic1,
                            const Mlp& critic2, const AgentConfig& cfg,
                            double action_bound, const Matrix& states,
                            const Matrix& z, bool want_grads) {
  const Eigen::Index n = states.cols();
  const Eigen::Index a_dim = z.rows();
  require(z.cols() == n, "sac_actor_eval: z/states column mismatch");

  const Matrix head = forward(actor, states);  // [mean; raw log-std]
  require(head.rows() == 2 * a_dim, "sac_actor_eval: actor head size mismatch");
  const Matrix mean = head.topRows(a_dim);
  const Matrix ls_raw = head.bottomRows(a_dim);
  const Matrix ls =
      ls_raw.cwiseMax(cfg.log_std_min).cwiseMin(cfg.log_std_max);
  const Matrix sigma = ls.array().exp().matrix();
  const Matrix u = mean + sigma.cwiseProduct(z);
  const Matrix t = u.array().tanh().matrix();
  const Matrix actions = action_bound * t;

  const Matrix x = vstack(states, actions);
  const Matrix q1 = forward(critic1, x);
  const Matrix q2 = forward(critic2, x);

  // Per-sample log pi of the reparameterized action.
  Vector log_probs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lp = 0.0;
    for (Eigen::Index k = 0; k < a_dim; ++k) {
      lp += -ls(k, i) - kHalfLog2Pi - 0.5 * z(k, i) * z(k, i);
      lp -= std::log(action_bound) + log_one_minus_tanh_sq(u(k, i));
    }
    log_probs[i] = lp;
  }

  SacActorEval out;
  double loss = 0.0, objective = 0.0;
  Matrix pick1 = Matrix::Zero(1, n);  // selects the argmin critic per sample
  Matrix pick2 = Matrix::Zero(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double qmin = std::min(q1(0, i), q2(0, i));
    loss += cfg.sac_alpha * log_probs[i] - qmin;
    objective += qmin - cfg.sac_alpha * log_probs[i];
    (q1(0, i) <= q2(0, i) ? pick1(0, i) : pick2(0, i)) = 1.0;
  }
  out.loss = loss / static_cast<double>(n);
  out.objective = objective / static_cast<double>(n);
  if (!want_grads) return out;

  const Matrix dq_da = (backward(critic1, x, pick1).input_grads +
                        backward(critic2, x, pick2).input_grads)
                           .bottomRows(a_dim);

  // d loss / du = alpha * d log pi / du - dQ/da * da/du, with
  // d log pi / du = 2 tanh(u) and da/du = bound * (1 - tanh(u)^2).
  const Matrix da_du = (action_bound * (1.0 - t.array().square())).matrix();
  const Matrix dl_du =
      (cfg.sac_alpha * 2.0 * t.array() - dq_da.array() * da_du.array()).matrix();

  // d loss / d mean = d loss / du;  d loss / d log-std adds the direct
  // -alpha term from -log sigma and the sigma*z route into u.
  Matrix g_mean = dl_du;
  Matrix g_ls =
      (-cfg.sac_alpha + dl_du.array() * sigma.array() * z.array()).matrix();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < a_dim; ++k)
      if (ls_raw(k, i) <= cfg.log_std_min || ls_raw(k, i) >= cfg.log_std_max)
        g_ls(k, i) = 0.0;  // clamp is flat outside the range

  Matrix g_head = vstack(g_mean, g_ls) / static_cast<double>(n);
  out.grads = backward(actor, states, g_head).grads;
  return out;
}

SacAgent::SacAgent(const EnvSpec& env, const AgentConfig& cfg,
                   const NoiseTier& tier, Rng& init_rng)
    : env_(env), cfg_(cfg), tier_(tier) {
  require(cfg.tau > 0.0 && cfg.tau <= 1.0, "SacAgent: tau outside (0, 1]");
  require(cfg.log_std_min < cfg.log_std_max, "SacAgent: bad log-std range");
  std::vector<int> actor_w{env.state_dim};
  actor_w.insert(actor_w.end(), cfg.hidden.begin(), cfg.hidden.end());
  actor_w.push_back(2 * env.action_dim);
  std::vector<int> critic_w{env.state_dim + env.action_dim};
  critic_w.insert(critic_w.end(), cfg.hidden.begin(), cfg.hidden.end());
  critic_w.push_back(1);

  actor_ = make_mlp(actor_w, Hidden::relu, Output::identity, 1.0, init_rng, 1e-3);
  critic1_ = make_mlp(critic_w, Hidden::relu, Output::identity, 1.0, init_rng);
  critic2_ = make_mlp(critic_w, Hidden::relu, Output::identity, 1.0, init_rng);
  target1_ = critic1_;
  target2_ = critic2_;
  actor_opt_ = make_adam(actor_, cfg.actor_lr);
  critic1_opt_ = make_adam(critic1_, cfg.critic_lr);
  critic2_opt_ = make_adam(critic2_, cfg.critic_lr);
}

double SacAgent::exploration_scale(bool is_key, bool an2n_on) const {
  if (!an2n_on) return 1.0;
  GateDecision d;
  d.is_key = is_key;
  return variance_scale_for(d, tier_);
}

SacAgent::Sample SacAgent::sample_action(const Vector& s, double variance_scale,
                                         Rng& rng, bool deterministic) const {
  require(variance_scale > 0.0, "SacAgent: variance scale must be positive");
  const Vector head = forward(actor_, s);
  const int a_dim = env_.action_dim;
  const Vector mean = head.head(a_dim);
  Vector ls(a_dim);
  for (int k = 0; k < a_dim; ++k) {
    double v = std::clamp(head[a_dim + k], cfg_.log_std_min, cfg_.log_std_max);
    v = std::clamp(v + std::log(variance_scale), cfg_.log_std_hard_min,
                   cfg_.log_std_hard_max);
    ls[k] = v;
  }

  Vector u = mean;
  if (!deterministic) {
    for (int k = 0; k < a_dim; ++k) u[k] += std::exp(ls[k]) * rng.normal();
  }
  Sample out;
  out.action = env_.action_bound * u.array().tanh().matrix();
  out.log_prob = sac_log_prob_presquash(u, mean, ls, env_.action_bound);
  return out;
}

Vector SacAgent::act(const Vector& s, double variance_scale, Rng& rng) {
  return sample_action(s, variance_scale, rng, false).action;
}

Vector SacAgent::act_deterministic(const Vector& s) const {
  const Vector head = forward(actor_, s);
  return env_.action_bound *
         head.head(env_.action_dim).array().tanh().matrix();
}

std::vector<double> SacAgent::td_targets(const std::vector<Transition>& batch,
                                         Rng& rng) const {
  require(!batch.empty(), "SacAgent::td_targets: empty batch");
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const int a_dim = env_.action_dim;
  const Matrix s2 = next_states_matrix(batch);
  const Matrix head = forward(actor_, s2);
  const Matrix mean = head.topRows(a_dim);
  const Matrix ls =
      head.bottomRows(a_dim).cwiseMax(cfg_.log_std_min).cwiseMin(cfg_.log_std_max);
  const Matrix sigma = ls.array().exp().matrix();

  Matrix z(a_dim, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (int r = 0; r < a_dim; ++r) z(r, c) = rng.normal();
  const Matrix u = mean + sigma.cwiseProduct(z);
  const Matrix a2 = env_.action_bound * u.array().tanh().matrix();

  const Matrix x2 = vstack(s2, a2);
  const Matrix q1 = forward(target1_, x2);
  const Matrix q2 = forward(target2_, x2);

  std::vector<double> y(batch.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lp = sac_log_prob_presquash(u.col(i), mean.col(i), ls.col(i),
                                             env_.action_bound);
    y[i] = sac_td_target_value(batch[i].reward, batch[i].done, cfg_.gamma,
                               std::min(q1(0, i), q2(0, i)), cfg_.sac_alpha, lp);
  }
  return y;
}

UpdateStats SacAgent::update(const std::vector<Transition>& batch, Rng& rng) {
  require(static_cast<int>(batch.size()) == cfg_.batch_size,
          "SacAgent::update: batch size does not match the configured N");
  const std::vector<double> y = td_targets(batch, rng);

  double critic_loss = 0.0;
  for (Mlp* critic : {&critic1_, &critic2_}) {
    LossAndGrads step = ddpg_critic_eval(*critic, batch, y);
    if (!std::isfinite(step.value))
      throw std::runtime_error("SacAgent::update: non-finite critic loss");
    critic_loss += step.value;
    adam_step(*critic, step.grads,
              critic == &critic1_ ? critic1_opt_ : critic2_opt_);
  }

  Matrix z(env_.action_dim, batch.size());
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = rng.normal();
  SacActorEval actor_step = sac_actor_eval(actor_, critic1_, critic2_, cfg_,
                                           env_.action_bound,
                                           states_matrix(batch), z);
  if (!std::isfinite(actor_step.loss))
    throw std::runtime_error("SacAgent::update: non-finite actor loss");
  adam_step(actor_, actor_step.grads, actor_opt_);

  soft_update(target1_, critic1_, cfg_.tau);
  soft_update(target2_, critic2_, cfg_.tau);
  return {critic_loss, actor_step.objective};
}

double SacAgent::terminal_value(const Vector& s) const {
  const Vector a = act_deterministic(s);
  Vector x(s.size() + a.size());
  x << s, a;
  return std::min(forward(target1_, x)[0], forward(target2_, x)[0]);
}

}  // namespace an2n
