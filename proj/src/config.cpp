#include "an2n/config.hpp"

#include <fstream>
#include <sstream>

namespace an2n {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    require(pos == v.size(), "");
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    require(pos == v.size(), "");
    return x;
  } catch (...) {
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  }
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad flag for " + key + ": '" + v +
                              "' (use on/off)");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<int>(parse_long(key, trim(item))));
  require(!out.empty(), "config: empty list for " + key);
  return out;
}

}  // namespace

std::string RunConfig::run_id() const {
  return env + "_" + algo + "_" + (an2n ? "on" : "off") + "_seed" +
         std::to_string(seed);
}

void RunConfig::validate() const {
  require(env == "pendulum" || env == "mcc" || env == "cliff",
          "config: env must be pendulum, mcc or cliff, got '" + env + "'");
  require(algo == "ddpg" || algo == "sac",
          "config: algo must be ddpg or sac, got '" + algo + "'");
  require(total_steps > 0 && epoch_steps > 0,
          "config: total_steps and epoch_steps must be positive");
  require(total_steps % epoch_steps == 0,
          "config: total_steps must be divisible by epoch_steps");
  require(eval_episodes >= 1, "config: eval_episodes must be >= 1");
  require(warmup_steps >= 0, "config: warmup_steps must be >= 0");
  require(buffer_capacity > 0, "config: buffer_capacity must be positive");
  require(agent.batch_size > 0, "config: batch_size must be positive");
  require(agent.update_every >= 1, "config: update_every must be >= 1");
  require(agent.gamma >= 0.0 && agent.gamma <= 1.0,
          "config: gamma outside [0, 1]");
  require(agent.tau > 0.0 && agent.tau <= 1.0, "config: tau outside (0, 1]");
  require(tier.small >= 0.0 && tier.big > tier.small,
          "config: need noise_big > noise_small >= 0");
  require(tier.sac_scale_up > 0.0 && tier.sac_scale_down > 0.0,
          "config: SAC variance scales must be positive");
  require(pct_start >= pct_end && pct_start <= 1.0 && pct_end >= 0.0,
          "config: need 0 <= pct_end <= pct_start <= 1");
  require(k_lower >= 1 && k_lower <= k_upper,
          "config: need 1 <= k_lower <= k_upper");
  require(sim_threshold_min <= sim_threshold &&
              sim_threshold <= sim_threshold_max,
          "config: sim_threshold outside its clamps");
  require(sim_eta > 0.0, "config: sim_eta must be positive");
  require(gate_window >= 1, "config: gate_window must be >= 1");
  require(agent.log_std_min < agent.log_std_max,
          "config: need log_std_min < log_std_max");
}

void apply_config(RunConfig& c, const std::string& key, const std::string& v) {
  if (key == "env") c.env = v;
  else if (key == "algo") c.algo = v;
  else if (key == "an2n") c.an2n = parse_flag(key, v);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(parse_long(key, v));
  else if (key == "total_steps") c.total_steps = parse_long(key, v);
  else if (key == "epoch_steps") c.epoch_steps = parse_long(key, v);
  else if (key == "eval_episodes") c.eval_episodes = static_cast<int>(parse_long(key, v));
  else if (key == "warmup_steps") c.warmup_steps = parse_long(key, v);
  else if (key == "buffer_capacity") c.buffer_capacity = static_cast<std::size_t>(parse_long(key, v));
  else if (key == "gamma") c.agent.gamma = parse_double(key, v);
  else if (key == "tau") c.agent.tau = parse_double(key, v);
  else if (key == "batch_size") c.agent.batch_size = static_cast<int>(parse_long(key, v));
  else if (key == "update_every") c.agent.update_every = static_cast<int>(parse_long(key, v));
  else if (key == "actor_lr") c.agent.actor_lr = parse_double(key, v);
  else if (key == "critic_lr") c.agent.critic_lr = parse_double(key, v);
  else if (key == "hidden") c.agent.hidden = parse_int_list(key, v);
  else if (key == "sac_alpha") c.agent.sac_alpha = parse_double(key, v);
  else if (key == "log_std_min") c.agent.log_std_min = parse_double(key, v);
  else if (key == "log_std_max") c.agent.log_std_max = parse_double(key, v);
  else if (key == "log_std_hard_min") c.agent.log_std_hard_min = parse_double(key, v);
  else if (key == "log_std_hard_max") c.agent.log_std_hard_max = parse_double(key, v);
  else if (key == "noise_small") c.tier.small = parse_double(key, v);
  else if (key == "noise_big") c.tier.big = parse_double(key, v);
  else if (key == "sac_scale_up") c.tier.sac_scale_up = parse_double(key, v);
  else if (key == "sac_scale_down") c.tier.sac_scale_down = parse_double(key, v);
  else if (key == "similarity") {
    if (v == "cosine") c.similarity = Similarity::cosine;
    else if (v == "manhattan") c.similarity = Similarity::manhattan;
    else throw std::invalid_argument("config: similarity must be cosine or manhattan");
  } else if (key == "cosine_center") {
    if (v == "running") c.cosine_center = CenterMode::running;
    else if (v == "queue") c.cosine_center = CenterMode::queue;
    else if (v == "zero") c.cosine_center = CenterMode::zero;
    else throw std::invalid_argument("config: cosine_center must be running, queue or zero");
  }
  else if (key == "sim_threshold") c.sim_threshold = parse_double(key, v);
  else if (key == "sim_eta") c.sim_eta = parse_double(key, v);
  else if (key == "sim_threshold_min") c.sim_threshold_min = parse_double(key, v);
  else if (key == "sim_threshold_max") c.sim_threshold_max = parse_double(key, v);
  else if (key == "gate_window") c.gate_window = static_cast<std::size_t>(parse_long(key, v));
  else if (key == "pct_start") c.pct_start = parse_double(key, v);
  else if (key == "pct_end") c.pct_end = parse_double(key, v);
  else if (key == "k_lower") c.k_lower = static_cast<int>(parse_long(key, v));
  else if (key == "k_upper") c.k_upper = static_cast<int>(parse_long(key, v));
  else if (key == "clip_sizes_queue") c.clip_sizes_queue = parse_flag(key, v);
  else if (key == "traj_buffer_capacity") c.traj_buffer_capacity = static_cast<std::size_t>(parse_long(key, v));
  else if (key == "timing") c.timing = parse_flag(key, v);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    lineno += 1;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not key = value: '" + line + "'");
    apply_config(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace an2n
