#pragma once

#include <deque>
#include <limits>
#include <vector>

#include "an2n/replay.hpp"
#include "an2n/types.hpp"

namespace an2n {

enum class Similarity { cosine, manhattan };

/// What the cosine metric centers states against.
enum class CenterMode { running, queue, zero };

struct SimilarityConfig {
  Similarity metric = Similarity::cosine;
  Vector state_mean;  // s-bar used by the cosine metric
  double threshold = 0.95;
  double eta = 0.05;  // threshold step size per adaptation
  double threshold_min = 0.5;
  double threshold_max = 0.999;
};

struct PctAddSchedule {
  double start = 0.4;
  double end = 0.2;
  long total_steps = 1;
};

/// Target big-noise fraction at a step: linear decay from start to end over
/// total_steps, constant afterwards.
double pct_add_at(long step, const PctAddSchedule& schedule);

struct NoiseTier {
  double small = 0.05;       // baseline Gaussian action-noise scale
  double big = 0.4;          // scale in key states
  double sac_scale_up = 1.5;   // std-range factor in key states
  double sac_scale_down = 0.5; // std-range factor elsewhere
};

struct GateDecision {
  double best_similarity = -std::numeric_limits<double>::infinity();
  double threshold = 0.0;
  bool is_key = false;
  Similarity metric = Similarity::cosine;
};

/// Bootstrapped n-step return of every state in a trajectory:
///   Reward(s_t) = sum_{k=t}^{T-1} gamma^{k-t} r_k + gamma^{T-t} * terminal_value
/// computed by one backward sweep.
std::vector<double> score_returns(const EvalTrajectory& traj,
                                  double terminal_value, double gamma);

/// The `count` states with smallest returns, ties broken by earlier index;
/// count beyond the trajectory length yields all states, worst first.
std::vector<KeyStateEntry> select_worst(const std::vector<Vector>& states,
                                        const std::vector<double>& returns,
                                        std::size_t count, int epoch = 0);

/// round(clip(20 * (avg_reward / traj_reward)^2, k_lower, k_upper)); a
/// near-zero or sign-flipped trajectory reward returns k_upper (remember a
/// catastrophic trajectory maximally).
int key_state_count(double avg_reward, double traj_reward, int k_lower,
                    int k_upper);

/// 1 / (1 + sum_k |a_k - b_k|), in (0, 1].
double manhattan_similarity(const Vector& a, const Vector& b);

/// Centered cosine in [-1, 1]; returns 0 when either centered norm is below
/// 1e-12.
double cosine_similarity(const Vector& a, const Vector& b, const Vector& mean);

/// Scans the queue for the best similarity to s. Empty queue: is_key false
/// with a -inf sentinel score.
GateDecision gate(const Vector& s, const KeyStateQueue& queue,
                  const SimilarityConfig& cfg);

/// threshold <- clamp(threshold + eta * (observed - target), min, max).
void adapt_threshold(SimilarityConfig& cfg, double observed_fraction,
                     double target_fraction);

double noise_scale_for(const GateDecision& d, const NoiseTier& tier);     // DDPG
double variance_scale_for(const GateDecision& d, const NoiseTier& tier);  // SAC

/// Incremental mean: mean <- mean + (s - mean) / count, count including s.
void update_running_mean(Vector& mean, const Vector& s, long count);

/// Per-step gating plus the closed-loop threshold controller. Owns the
/// running state mean and a sliding window of recent key decisions; the
/// threshold adapts only on calls where the queue is nonempty, since it has
/// no effect otherwise.
class GateController {
 public:
  GateController(SimilarityConfig cfg, std::size_t window,
                 CenterMode center = CenterMode::running);

  GateDecision decide(const Vector& s, const KeyStateQueue& queue,
                      double target_fraction);

  /// Same control path with a precomputed similarity score; lets synthetic
  /// streams drive the controller directly.
  GateDecision decide_with_similarity(double best_similarity,
                                      bool queue_nonempty,
                                      double target_fraction);

  const SimilarityConfig& config() const { return cfg_; }
  double observed_fraction() const;
  long calls() const { return calls_; }

 private:
  GateDecision record(const GateDecision& d, bool gateable,
                      double target_fraction);

  SimilarityConfig cfg_;
  CenterMode center_;
  std::deque<bool> window_;
  std::size_t window_cap_;
  long window_keys_ = 0;
  long calls_ = 0;
  long states_seen_ = 0;
};

}  // namespace an2n
