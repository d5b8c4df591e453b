#include "an2n/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "an2n/agents.hpp"
#include "an2n/explore.hpp"
#include "an2n/harness.hpp"

namespace an2n {

namespace {

std::string fmt_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Central finite difference of a scalar function over every parameter of a
// network, against the provided analytic bundle.
template <typename LossFn>
double max_fd_error(Mlp& net, const GradientBundle& analytic, LossFn loss,
                    double h) {
  double worst = 0.0;
  auto probe = [&](double& p, double g) {
    const double saved = p;
    p = saved + h;
    const double up = loss();
    p = saved - h;
    const double down = loss();
    p = saved;
    worst = std::max(worst, rel_err(g, (up - down) / (2.0 * h)));
  };
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    Matrix& w = net.weights[k];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        probe(w(i, j), analytic.weight_grads[k](i, j));
    Vector& b = net.biases[k];
    for (Eigen::Index i = 0; i < b.size(); ++i)
      probe(b[i], analytic.bias_grads[k][i]);
  }
  return worst;
}

std::vector<Transition> random_batch(int n, int s_dim, int a_dim, double bound,
                                     Rng& rng) {
  std::vector<Transition> batch;
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.state = rng.normal_vector(s_dim);
    t.action = rng.uniform_vector(a_dim, -bound, bound);
    t.reward = rng.normal();
    t.next_state = rng.normal_vector(s_dim);
    t.done = rng.uniform() < 0.1;
    batch.push_back(std::move(t));
  }
  return batch;
}

}  // namespace

SuiteResult nstep_oracle_suite() {
  Rng rng(20240601);
  const double gammas[] = {0.0, 0.5, 0.9, 0.99, 1.0};
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int len = 1 + static_cast<int>(rng.index(200));
    EvalTrajectory traj;
    for (int t = 0; t < len; ++t) {
      traj.states.push_back(rng.normal_vector(3));
      traj.rewards.push_back(rng.uniform(-10.0, 10.0));
    }
    traj.final_state = rng.normal_vector(3);
    const double tv = rng.uniform(-50.0, 50.0);
    const double gamma = gammas[trial % 5];

    const auto fast = score_returns(traj, tv, gamma);
    for (int t = 0; t < len; ++t) {
      double brute = 0.0;  // O(T) per state, O(T^2) per trajectory
      for (int k = t; k < len; ++k)
        brute += std::pow(gamma, k - t) * traj.rewards[k];
      brute += std::pow(gamma, len - t) * tv;
      worst = std::max(worst, std::abs(fast[t] - brute) /
                                  std::max({1.0, std::abs(fast[t]),
                                            std::abs(brute)}));
    }
  }
  return {"nstep-oracle", worst <= 1e-12, "max rel err " + fmt_sci(worst)};
}

SuiteResult gradient_fd_suite() {
  const EnvSpec spec{3, 1, 2.0, 200};
  AgentConfig cfg;
  cfg.hidden = {16, 16};
  cfg.batch_size = 16;
  const NoiseTier tier;
  const double h = 1e-5;

  double worst_critic = 0.0, worst_actor = 0.0, worst_sac = 0.0;
  for (int point = 0; point < 20; ++point) {
    Rng rng(500 + point);
    DdpgAgent ddpg(spec, cfg, tier, rng);
    const auto batch = random_batch(16, 3, 1, 2.0, rng);
    std::vector<double> y(batch.size());
    for (auto& v : y) v = rng.normal();

    const auto critic_eval = ddpg_critic_eval(ddpg.critic(), batch, y);
    worst_critic = std::max(
        worst_critic,
        max_fd_error(ddpg.critic(), critic_eval.grads,
                     [&] { return ddpg_critic_eval(ddpg.critic(), batch, y).value; },
                     h));

    const auto actor_eval = ddpg_actor_eval(ddpg.actor(), ddpg.critic(), batch);
    worst_actor = std::max(
        worst_actor,
        max_fd_error(
            ddpg.actor(), actor_eval.grads,
            [&] { return ddpg_actor_eval(ddpg.actor(), ddpg.critic(), batch).value; },
            h));

    SacAgent sac(spec, cfg, tier, rng);
    Matrix states(3, 16), z(1, 16);
    for (int i = 0; i < 16; ++i) {
      states.col(i) = rng.normal_vector(3);
      z(0, i) = rng.normal();
    }
    const auto sac_eval = sac_actor_eval(sac.actor(), sac.critic1(),
                                         sac.critic2(), cfg, spec.action_bound,
                                         states, z);
    worst_sac = std::max(
        worst_sac,
        max_fd_error(sac.actor(), sac_eval.grads,
                     [&] {
                       return sac_actor_eval(sac.actor(), sac.critic1(),
                                             sac.critic2(), cfg,
                                             spec.action_bound, states, z,
                                             false)
                           .loss;
                     },
                     h));
  }
  const bool pass =
      worst_critic < 1e-4 && worst_actor < 1e-4 && worst_sac < 1e-3;
  return {"gradient-fd", pass,
          "max rel err critic " + fmt_sci(worst_critic) + ", actor " +
              fmt_sci(worst_actor) + ", sac actor " + fmt_sci(worst_sac)};
}

SuiteResult similarity_suite_with(const CosineFn& cosine,
                                  const ManhattanFn& manhattan) {
  Rng rng(777);
  long failures = 0;
  std::string first_failure;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) {
      failures += 1;
      if (first_failure.empty()) first_failure = what;
    }
  };

  for (int trial = 0; trial < 10000; ++trial) {
    const int dim = 1 + static_cast<int>(rng.index(16));
    const Vector a = rng.uniform_vector(dim, -5.0, 5.0);
    const Vector b = rng.uniform_vector(dim, -5.0, 5.0);
    const Vector mean = rng.uniform_vector(dim, -1.0, 1.0);

    const double m = manhattan(a, b);
    check(m > 0.0 && m <= 1.0, "manhattan range");
    check(m == manhattan(b, a), "manhattan symmetry");

    const double c = cosine(a, b, mean);
    check(c >= -1.0 - 1e-12 && c <= 1.0 + 1e-12, "cosine range");
    check(std::abs(c - cosine(b, a, mean)) <= 1e-15, "cosine symmetry");
    if ((a - mean).norm() >= 1e-12)
      check(std::abs(cosine(a, a, mean) - 1.0) <= 1e-12, "cosine identity");

    // Invariance to positive uniform scaling of both centered inputs.
    const double scale = rng.uniform(0.1, 10.0);
    const Vector a2 = mean + scale * (a - mean);
    const Vector b2 = mean + scale * (b - mean);
    check(std::abs(cosine(a2, b2, mean) - c) <= 1e-9, "cosine scale invariance");
  }
  std::string detail = std::to_string(failures) + " failures over 1e4 pairs";
  if (failures > 0) detail += " (first: " + first_failure + ")";
  return {"similarity-properties", failures == 0, detail};
}

SuiteResult similarity_suite() {
  return similarity_suite_with(
      [](const Vector& a, const Vector& b, const Vector& m) {
        return cosine_similarity(a, b, m);
      },
      [](const Vector& a, const Vector& b) {
        return manhattan_similarity(a, b);
      });
}

SuiteResult controller_suite() {
  double worst = 0.0;
  for (double target : {0.2, 0.3, 0.4}) {
    SimilarityConfig cfg;  // library defaults, eta included
    cfg.eta = 0.001;
    GateController controller(cfg, 1000);
    Rng rng(static_cast<std::uint64_t>(target * 1000));
    for (int call = 1; call <= 5000; ++call)
      controller.decide_with_similarity(rng.uniform(), true, target);
    worst = std::max(worst, std::abs(controller.observed_fraction() - target));
  }

  PctAddSchedule schedule{0.4, 0.2, 60000};
  const bool endpoints = pct_add_at(0, schedule) == 0.4 &&
                         pct_add_at(60000, schedule) == 0.2 &&
                         pct_add_at(90000, schedule) == 0.2;
  const bool pass = worst <= 0.05 && endpoints;
  return {"controller-convergence", pass,
          "max |observed - target| at call 5000: " + fmt_sci(worst) +
              (endpoints ? "" : ", schedule endpoints wrong")};
}

SuiteResult clip_formula_suite() {
  long mismatches = 0;
  const int k_lower = 5, k_upper = 20;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double avg = -250.0 + 55.0 * i;   // spans negative, zero, positive
      const double traj = -225.0 + 50.0 * j;  // includes an exact zero
      // Straight-line oracle for round(clip(20 (avg/traj)^2, lo, hi)) with
      // the degenerate guard.
      int expected;
      if (std::abs(traj) < 1e-9 || avg * traj < 0.0) {
        expected = k_upper;
      } else {
        double v = 20.0 * (avg / traj) * (avg / traj);
        if (v < k_lower) v = k_lower;
        if (v > k_upper) v = k_upper;
        expected = static_cast<int>(std::lround(v));
      }
      if (key_state_count(avg, traj, k_lower, k_upper) != expected)
        mismatches += 1;
    }
  }
  return {"clip-formula", mismatches == 0,
          std::to_string(mismatches) + " mismatches over 100 grid points"};
}

SuiteResult queue_model_suite() {
  Rng rng(99);
  KeyStateQueue queue(5, 20);
  std::deque<KeyStateEntry> model;
  std::size_t model_cap = 20;

  long mismatches = 0;
  long ops = 0;
  while (ops < 100000) {
    const auto op = rng.index(10);
    if (op < 7) {  // admit a small batch
      std::vector<KeyStateEntry> entries;
      const std::size_t k = 1 + rng.index(5);
      for (std::size_t i = 0; i < k; ++i)
        entries.push_back(
            {rng.normal_vector(3), rng.uniform(-100.0, 100.0), 0});
      queue.admit(entries);
      for (const auto& e : entries) {
        model.push_back(e);
        while (model.size() > model_cap) model.pop_front();
      }
      ops += static_cast<long>(k);
    } else {  // resize, clamped like the queue's [k_lower, k_upper]
      const std::size_t c = 1 + rng.index(25);
      queue.set_capacity(c);
      model_cap = std::clamp<std::size_t>(c, 5, 20);
      while (model.size() > model_cap) model.pop_front();
      ops += 1;
    }

    bool same = queue.size() == model.size() &&
                queue.current_capacity() == model_cap;
    if (same) {
      for (std::size_t i = 0; i < model.size(); ++i) {
        if (queue.at(i).scored_return != model[i].scored_return ||
            queue.at(i).state != model[i].state) {
          same = false;
          break;
        }
      }
    }
    if (!same) mismatches += 1;
  }
  return {"queue-model", mismatches == 0,
          std::to_string(mismatches) + " state mismatches over 1e5 operations"};
}

SuiteResult determinism_suite() {
  RunConfig cfg;
  cfg.env = "pendulum";
  cfg.algo = "ddpg";
  cfg.an2n = true;
  cfg.seed = 7;
  cfg.total_steps = 3000;
  cfg.epoch_steps = 1000;
  cfg.eval_episodes = 3;
  cfg.warmup_steps = 400;
  cfg.agent.batch_size = 32;
  cfg.agent.hidden = {16, 16};

  const auto dir = std::filesystem::temp_directory_path();
  const auto path_a = (dir / "an2n_selftest_a.csv").string();
  const auto path_b = (dir / "an2n_selftest_b.csv").string();
  write_metrics(run_training(cfg), path_a);
  write_metrics(run_training(cfg), path_b);

  const auto slurp = [](const std::string& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  const bool same = slurp(path_a) == slurp(path_b);
  std::filesystem::remove(path_a);
  std::filesystem::remove(path_b);
  return {"determinism", same,
          same ? "identical metrics across two runs" : "metrics files differ"};
}

std::vector<SuiteResult> selftest_suites() {
  return {nstep_oracle_suite(),  gradient_fd_suite(), similarity_suite(),
          controller_suite(),    clip_formula_suite(), queue_model_suite(),
          determinism_suite()};
}

int run_selftest(std::ostream& os) {
  bool all_pass = true;
  for (const auto& suite : selftest_suites()) {
    os << (suite.pass ? "[PASS] " : "[FAIL] ") << suite.name << ": "
       << suite.detail << "\n";
    all_pass = all_pass && suite.pass;
  }
  os << (all_pass ? "selftest: all suites passed\n"
                  : "selftest: FAILURES detected\n");
  return all_pass ? 0 : 1;
}

}  // namespace an2n
