#include "an2n/harness.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "an2n/env.hpp"

namespace an2n {

const char kMetricsHeader[] =
    "run_id,seed,env,algo,an2n,epoch,step,eval_return_mean,eval_return_std,"
    "key_fraction,sim_threshold,fifo_len,critic_loss,wall_ms";

namespace {

// Shortest decimal form that round-trips the double exactly;
// locale-independent by construction.
std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double_field(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(),
          "metrics: bad number field '" + s + "'");
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::unique_ptr<Agent> make_agent(const RunConfig& cfg, const EnvSpec& spec,
                                  Rng& init_rng) {
  if (cfg.algo == "sac")
    return std::make_unique<SacAgent>(spec, cfg.agent, cfg.tier, init_rng);
  return std::make_unique<DdpgAgent>(spec, cfg.agent, cfg.tier, init_rng);
}

}  // namespace

void write_metrics(const std::vector<MetricsRecord>& records,
                   const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // binary: no newline translation
  if (!os) throw std::runtime_error("write_metrics: cannot open " + path);
  os << kMetricsHeader << "\n";
  for (const auto& r : records) {
    os << r.run_id << ',' << r.seed << ',' << r.env << ',' << r.algo << ','
       << (r.an2n ? "on" : "off") << ',' << r.epoch << ',' << r.step << ','
       << format_double(r.eval_return_mean) << ','
       << format_double(r.eval_return_std) << ','
       << format_double(r.key_fraction) << ','
       << format_double(r.sim_threshold) << ',' << r.fifo_len << ','
       << format_double(r.critic_loss) << ',' << r.wall_ms << "\n";
  }
  if (!os) throw std::runtime_error("write_metrics: write failed for " + path);
}

std::vector<MetricsRecord> read_metrics(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_metrics: cannot open " + path);
  std::string line;
  require(static_cast<bool>(std::getline(is, line)),
          "read_metrics: empty file " + path);
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
    line.pop_back();
  require(line == kMetricsHeader, "read_metrics: unexpected header in " + path);

  std::vector<MetricsRecord> out;
  while (std::getline(is, line)) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
      line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    require(f.size() == 14, "read_metrics: bad field count in " + path);
    MetricsRecord r;
    r.run_id = f[0];
    r.seed = static_cast<std::uint64_t>(std::stoull(f[1]));
    r.env = f[2];
    r.algo = f[3];
    require(f[4] == "on" || f[4] == "off", "read_metrics: bad an2n field");
    r.an2n = f[4] == "on";
    r.epoch = std::stol(f[5]);
    r.step = std::stol(f[6]);
    r.eval_return_mean = parse_double_field(f[7]);
    r.eval_return_std = parse_double_field(f[8]);
    r.key_fraction = parse_double_field(f[9]);
    r.sim_threshold = parse_double_field(f[10]);
    r.fifo_len = std::stol(f[11]);
    r.critic_loss = parse_double_field(f[12]);
    r.wall_ms = std::stol(f[13]);
    out.push_back(std::move(r));
  }
  return out;
}

EvaluationResult evaluate(const Agent& agent, const std::string& env_name,
                          int episodes, std::uint64_t seed) {
  require(episodes >= 1, "evaluate: episodes must be >= 1");
  auto env = make_env(env_name);
  Rng rng(seed);

  EvaluationResult res;
  double best_return = -std::numeric_limits<double>::infinity();
  double worst_return = std::numeric_limits<double>::infinity();
  for (int ep = 0; ep < episodes; ++ep) {
    EvalTrajectory traj;
    Vector s = env->reset(rng);
    bool done = false;
    while (!done) {
      const Vector a = agent.act_deterministic(s);
      StepResult sr = env->step(s, a);
      traj.states.push_back(s);
      traj.rewards.push_back(sr.reward);
      s = sr.next_state;
      done = sr.done;
    }
    traj.final_state = s;
    const double ret = traj.total_reward();
    res.returns.push_back(ret);
    if (ret > best_return) {
      best_return = ret;
      res.best = traj;
    }
    if (ret < worst_return) {
      worst_return = ret;
      res.worst = std::move(traj);
    }
  }
  double sum = 0.0;
  for (double r : res.returns) sum += r;
  res.mean = sum / res.returns.size();
  double var = 0.0;
  for (double r : res.returns) var += (r - res.mean) * (r - res.mean);
  res.stddev = std::sqrt(var / res.returns.size());
  return res;
}

std::vector<MetricsRecord> run_training(const RunConfig& cfg,
                                        std::ostream* progress) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  auto env = make_env(cfg.env);
  const EnvSpec& spec = env->spec();

  Rng init_rng(stream_seed(cfg.seed, Stream::param_init));
  Rng env_rng(stream_seed(cfg.seed, Stream::env));
  Rng action_rng(stream_seed(cfg.seed, Stream::action));
  Rng batch_rng(stream_seed(cfg.seed, Stream::batch));
  Rng update_rng(stream_seed(cfg.seed, Stream::update));

  auto agent = make_agent(cfg, spec, init_rng);
  ReplayBuffer buffer(cfg.buffer_capacity);
  TrajectoryBuffer eval_trajectories(cfg.traj_buffer_capacity);
  KeyStateQueue queue(static_cast<std::size_t>(cfg.k_lower),
                      static_cast<std::size_t>(cfg.k_upper));

  SimilarityConfig sim_cfg;
  sim_cfg.metric = cfg.similarity;
  sim_cfg.threshold = cfg.sim_threshold;
  sim_cfg.eta = cfg.sim_eta;
  sim_cfg.threshold_min = cfg.sim_threshold_min;
  sim_cfg.threshold_max = cfg.sim_threshold_max;
  GateController controller(sim_cfg, cfg.gate_window, cfg.cosine_center);
  const PctAddSchedule schedule{cfg.pct_start, cfg.pct_end, cfg.total_steps};

  // Running mean of evaluation-episode returns, feeding the key-state count.
  double eval_return_mean_all = 0.0;
  long eval_episodes_seen = 0;

  std::vector<MetricsRecord> records;
  Vector s = env->reset(env_rng);
  long epoch_keys = 0;
  double epoch_loss_sum = 0.0;
  long epoch_updates = 0;

  for (long step = 1; step <= cfg.total_steps; ++step) {
    bool is_key = false;
    if (cfg.an2n) {
      const GateDecision d =
          controller.decide(s, queue, pct_add_at(step - 1, schedule));
      is_key = d.is_key;
      epoch_keys += is_key ? 1 : 0;
    }

    Vector a;
    if (step <= cfg.warmup_steps) {
      a = action_rng.uniform_vector(spec.action_dim, -spec.action_bound,
                                    spec.action_bound);
    } else {
      a = agent->act(s, agent->exploration_scale(is_key, cfg.an2n), action_rng);
    }

    StepResult sr = env->step(s, a);
    Transition t{s, a, sr.reward, sr.next_state, sr.done && !sr.truncated};
    buffer.push(t);
    if (cfg.on_transition) cfg.on_transition(step, t);

    s = sr.done ? env->reset(env_rng) : sr.next_state;

    if (step > cfg.warmup_steps && step % cfg.agent.update_every == 0) {
      const auto batch =
          buffer.sample(static_cast<std::size_t>(cfg.agent.batch_size),
                        batch_rng);
      UpdateStats stats;
      try {
        stats = agent->update(batch, update_rng);
      } catch (const std::exception& e) {
        throw std::runtime_error(cfg.run_id() + ": aborted at step " +
                                 std::to_string(step) + ": " + e.what());
      }
      epoch_loss_sum += stats.critic_loss;
      epoch_updates += 1;
    }

    if (step % cfg.epoch_steps == 0) {
      const long epoch = step / cfg.epoch_steps;
      const EvaluationResult eval =
          evaluate(*agent, cfg.env, cfg.eval_episodes,
                   stream_seed(cfg.seed, Stream::eval,
                               static_cast<std::uint64_t>(epoch)));

      if (cfg.an2n) {
        for (double ret : eval.returns) {
          eval_episodes_seen += 1;
          eval_return_mean_all +=
              (ret - eval_return_mean_all) / eval_episodes_seen;
        }
        const EvalTrajectory& traj = eval.best;
        eval_trajectories.push(traj);
        const double tv = agent->terminal_value(traj.final_state);
        const auto returns = score_returns(traj, tv, cfg.agent.gamma);
        const int count =
            key_state_count(eval_return_mean_all, traj.total_reward(),
                            cfg.k_lower, cfg.k_upper);
        if (cfg.clip_sizes_queue)
          queue.set_capacity(static_cast<std::size_t>(count));
        const auto admitted =
            select_worst(traj.states, returns, static_cast<std::size_t>(count),
                         static_cast<int>(epoch));
        queue.admit(admitted);
        if (cfg.on_key_admit) cfg.on_key_admit(epoch, admitted);
      }

      MetricsRecord r;
      r.run_id = cfg.run_id();
      r.seed = cfg.seed;
      r.env = cfg.env;
      r.algo = cfg.algo;
      r.an2n = cfg.an2n;
      r.epoch = epoch;
      r.step = step;
      r.eval_return_mean = eval.mean;
      r.eval_return_std = eval.stddev;
      r.key_fraction =
          static_cast<double>(epoch_keys) / static_cast<double>(cfg.epoch_steps);
      r.sim_threshold = controller.config().threshold;
      r.fifo_len = static_cast<long>(queue.size());
      r.critic_loss = epoch_updates > 0 ? epoch_loss_sum / epoch_updates : 0.0;
      if (cfg.timing) {
        const auto now = std::chrono::steady_clock::now();
        r.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        now - t0)
                        .count();
      }
      records.push_back(r);

      if (progress) {
        *progress << cfg.run_id() << " epoch " << epoch << "/"
                  << cfg.total_steps / cfg.epoch_steps << " step " << step
                  << " eval " << eval.mean << " +- " << eval.stddev
                  << " keys " << r.key_fraction << " thr " << r.sim_threshold
                  << " fifo " << r.fifo_len << "\n";
      }
      epoch_keys = 0;
      epoch_loss_sum = 0.0;
      epoch_updates = 0;
    }
  }
  return records;
}

}  // namespace an2n
