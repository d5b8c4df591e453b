#include "an2n/explore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace an2n {

double pct_add_at(long step, const PctAddSchedule& schedule) {
  require(step >= 0, "pct_add_at: step must be nonnegative");
  require(schedule.total_steps > 0, "pct_add_at: schedule needs total_steps > 0");
  require(schedule.start >= schedule.end && schedule.start <= 1.0 &&
              schedule.end >= 0.0,
          "pct_add_at: need 0 <= end <= start <= 1");
  if (step >= schedule.total_steps) return schedule.end;
  const double frac = static_cast<double>(step) / schedule.total_steps;
  return schedule.start + (schedule.end - schedule.start) * frac;
}

std::vector<double> score_returns(const EvalTrajectory& traj,
                                  double terminal_value, double gamma) {
  require(!traj.states.empty(), "score_returns: empty trajectory");
  require(traj.states.size() == traj.rewards.size(),
          "score_returns: states/rewards length mismatch");
  require(gamma >= 0.0 && gamma <= 1.0, "score_returns: gamma outside [0, 1]");

  const std::size_t n = traj.rewards.size();
  std::vector<double> returns(n);
  double acc = terminal_value;  // Reward(s_T) := terminal_value
  for (std::size_t t = n; t-- > 0;) {
    acc = traj.rewards[t] + gamma * acc;
    returns[t] = acc;
  }
  return returns;
}

std::vector<KeyStateEntry> select_worst(const std::vector<Vector>& states,
                                        const std::vector<double>& returns,
                                        std::size_t count, int epoch) {
  require(states.size() == returns.size(),
          "select_worst: states/returns length mismatch");
  std::vector<std::size_t> idx(states.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return returns[a] < returns[b];
  });
  const std::size_t take = std::min(count, states.size());
  std::vector<KeyStateEntry> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.push_back({states[idx[i]], returns[idx[i]], epoch});
  return out;
}

int key_state_count(double avg_reward, double traj_reward, int k_lower,
                    int k_upper) {
  require(k_lower >= 0 && k_lower <= k_upper,
          "key_state_count: need 0 <= k_lower <= k_upper");
  constexpr double kEps = 1e-9;
  if (std::abs(traj_reward) < kEps || avg_reward * traj_reward < 0.0)
    return k_upper;
  const double ratio = avg_reward / traj_reward;
  const double raw = 20.0 * ratio * ratio;
  const double clipped = std::clamp(raw, static_cast<double>(k_lower),
                                    static_cast<double>(k_upper));
  return static_cast<int>(std::lround(clipped));
}

double manhattan_similarity(const Vector& a, const Vector& b) {
  require(a.size() == b.size(), "manhattan_similarity: length mismatch");
  return 1.0 / (1.0 + (a - b).cwiseAbs().sum());
}

double cosine_similarity(const Vector& a, const Vector& b, const Vector& mean) {
  require(a.size() == b.size() && a.size() == mean.size(),
          "cosine_similarity: length mismatch");
  const Vector ca = a - mean;
  const Vector cb = b - mean;
  const double na = ca.norm();
  const double nb = cb.norm();
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return ca.dot(cb) / (na * nb);
}

GateDecision gate(const Vector& s, const KeyStateQueue& queue,
                  const SimilarityConfig& cfg) {
  GateDecision d;
  d.threshold = cfg.threshold;
  d.metric = cfg.metric;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const double sim =
        cfg.metric == Similarity::manhattan
            ? manhattan_similarity(s, queue.at(i).state)
            : cosine_similarity(s, queue.at(i).state, cfg.state_mean);
    d.best_similarity = std::max(d.best_similarity, sim);
  }
  d.is_key = !queue.empty() && d.best_similarity >= cfg.threshold;
  return d;
}

void adapt_threshold(SimilarityConfig& cfg, double observed_fraction,
                     double target_fraction) {
  require(observed_fraction >= 0.0 && observed_fraction <= 1.0 &&
              target_fraction >= 0.0 && target_fraction <= 1.0,
          "adapt_threshold: fractions must lie in [0, 1]");
  cfg.threshold =
      std::clamp(cfg.threshold + cfg.eta * (observed_fraction - target_fraction),
                 cfg.threshold_min, cfg.threshold_max);
}

double noise_scale_for(const GateDecision& d, const NoiseTier& tier) {
  return d.is_key ? tier.big : tier.small;
}

double variance_scale_for(const GateDecision& d, const NoiseTier& tier) {
  return d.is_key ? tier.sac_scale_up : tier.sac_scale_down;
}

void update_running_mean(Vector& mean, const Vector& s, long count) {
  require(count >= 1, "update_running_mean: count must be >= 1");
  require(mean.size() == s.size(), "update_running_mean: length mismatch");
  mean += (s - mean) / static_cast<double>(count);
}

GateController::GateController(SimilarityConfig cfg, std::size_t window,
                               CenterMode center)
    : cfg_(std::move(cfg)), center_(center), window_cap_(window) {
  require(window >= 1, "GateController: window must be >= 1");
}

GateDecision GateController::decide(const Vector& s, const KeyStateQueue& queue,
                                    double target_fraction) {
  states_seen_ += 1;
  if (cfg_.state_mean.size() == 0) cfg_.state_mean = Vector::Zero(s.size());
  switch (center_) {
    case CenterMode::running:
      update_running_mean(cfg_.state_mean, s, states_seen_);
      break;
    case CenterMode::queue: {
      Vector m = Vector::Zero(s.size());
      for (std::size_t i = 0; i < queue.size(); ++i) m += queue.at(i).state;
      if (queue.size() > 0) m /= static_cast<double>(queue.size());
      cfg_.state_mean = m;
      break;
    }
    case CenterMode::zero:
      cfg_.state_mean.setZero();
      break;
  }
  const GateDecision d = gate(s, queue, cfg_);
  return record(d, !queue.empty(), target_fraction);
}

GateDecision GateController::decide_with_similarity(double best_similarity,
                                                    bool queue_nonempty,
                                                    double target_fraction) {
  GateDecision d;
  d.best_similarity = best_similarity;
  d.threshold = cfg_.threshold;
  d.metric = cfg_.metric;
  d.is_key = queue_nonempty && best_similarity >= cfg_.threshold;
  return record(d, queue_nonempty, target_fraction);
}

GateDecision GateController::record(const GateDecision& d, bool gateable,
                                    double target_fraction) {
  calls_ += 1;
  if (gateable) {
    window_.push_back(d.is_key);
    window_keys_ += d.is_key ? 1 : 0;
    if (window_.size() > window_cap_) {
      window_keys_ -= window_.front() ? 1 : 0;
      window_.pop_front();
    }
    adapt_threshold(cfg_, observed_fraction(), target_fraction);
  }
  return d;
}

double GateController::observed_fraction() const {
  if (window_.empty()) return 0.0;
  return static_cast<double>(window_keys_) / static_cast<double>(window_.size());
}

}  // namespace an2n
