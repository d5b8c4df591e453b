#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "an2n/agents.hpp"
#include "an2n/explore.hpp"

namespace an2n {

/// Full experiment configuration. File format is flat `key = value` text with
/// '#' comments; CLI flags override file values. validate() runs before any
/// compute.
struct RunConfig {
  std::string env = "pendulum";
  std::string algo = "ddpg";
  bool an2n = false;
  std::uint64_t seed = 0;

  long total_steps = 50000;
  long epoch_steps = 2000;
  int eval_episodes = 10;
  long warmup_steps = 1000;
  std::size_t buffer_capacity = 1000000;

  AgentConfig agent;
  NoiseTier tier;

  Similarity similarity = Similarity::cosine;
  CenterMode cosine_center = CenterMode::running;
  double sim_threshold = 0.95;
  double sim_eta = 0.001;
  double sim_threshold_min = 0.5;
  double sim_threshold_max = 0.999;
  std::size_t gate_window = 1000;
  double pct_start = 0.4;
  double pct_end = 0.2;
  int k_lower = 5;
  int k_upper = 20;
  /// Alternative reading of the key-state sizing formula: resize the queue's
  /// capacity to the per-trajectory count instead of keeping it at k_upper.
  bool clip_sizes_queue = false;
  std::size_t traj_buffer_capacity = 100;

  /// Real wall-clock times in the metrics CSV; off keeps the file
  /// byte-deterministic (wall_ms column is 0).
  bool timing = false;

  /// Test hooks, not config keys: observe every stored transition and every
  /// batch of admitted key states.
  std::function<void(long step, const Transition&)> on_transition;
  std::function<void(long epoch, const std::vector<KeyStateEntry>&)>
      on_key_admit;

  std::string run_id() const;
  void validate() const;
};

/// Applies one key=value pair; unknown keys or unparsable values throw.
void apply_config(RunConfig& cfg, const std::string& key,
                  const std::string& value);

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace an2n
