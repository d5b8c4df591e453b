#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "an2n/config.hpp"

namespace an2n {

/// One evaluation-epoch output row. Serialized to CSV with the fixed header
/// run_id,seed,env,algo,an2n,epoch,step,eval_return_mean,eval_return_std,
/// key_fraction,sim_threshold,fifo_len,critic_loss,wall_ms
struct MetricsRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string env;
  std::string algo;
  bool an2n = false;
  long epoch = 0;  // 1-based
  long step = 0;   // global step at the epoch boundary
  double eval_return_mean = 0.0;
  double eval_return_std = 0.0;
  double key_fraction = 0.0;   // big-noise steps / epoch steps
  double sim_threshold = 0.0;
  long fifo_len = 0;
  double critic_loss = 0.0;  // mean over this epoch's gradient steps
  long wall_ms = 0;          // 0 unless timing is enabled (determinism)
};

extern const char kMetricsHeader[];

void write_metrics(const std::vector<MetricsRecord>& records,
                   const std::string& path);
std::vector<MetricsRecord> read_metrics(const std::string& path);

struct EvaluationResult {
  std::vector<double> returns;  // undiscounted, one per episode
  double mean = 0.0;
  double stddev = 0.0;  // population
  EvalTrajectory best;
  EvalTrajectory worst;
};

/// Noise-free policy rollouts on a fresh environment instance; fully
/// determined by (agent parameters, env name, episodes, seed).
EvaluationResult evaluate(const Agent& agent, const std::string& env_name,
                          int episodes, std::uint64_t seed);

/// Warm-up, then the interact -> store -> gate -> update loop, evaluating at
/// every epoch boundary and running the key-state pipeline when an2n is on.
/// Deterministic given the config and seed. Progress lines go to *progress
/// when given.
std::vector<MetricsRecord> run_training(const RunConfig& cfg,
                                        std::ostream* progress = nullptr);

}  // namespace an2n
