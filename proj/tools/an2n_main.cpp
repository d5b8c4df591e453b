#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "an2n/harness.hpp"
#include "an2n/report.hpp"
#include "an2n/selftest.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"AN2N exploration for DDPG/SAC continuous control"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Run one training job");
  std::string config_path, out_dir = "runs";
  std::string algo, env, an2n_flag;
  std::int64_t seed = -1;
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--seed", seed, "run seed (overrides config)");
  train->add_option("--algo", algo, "ddpg|sac (overrides config)");
  train->add_option("--an2n", an2n_flag, "on|off (overrides config)");
  train->add_option("--env", env, "pendulum|mcc|cliff (overrides config)");
  train->add_option("--out", out_dir, "metrics output directory");

  // report
  auto* report = app.add_subcommand("report", "Summaries and learning curves");
  std::vector<std::string> inputs;
  std::string report_out = "report";
  report->add_option("--in", inputs, "metrics directories or .csv files")
      ->required();
  report->add_option("--out", report_out, "report output directory");

  // selftest
  auto* selftest = app.add_subcommand("selftest", "Run the oracle suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      an2n::RunConfig cfg;
      if (!config_path.empty()) cfg = an2n::load_config(config_path);
      if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
      if (!algo.empty()) an2n::apply_config(cfg, "algo", algo);
      if (!an2n_flag.empty()) an2n::apply_config(cfg, "an2n", an2n_flag);
      if (!env.empty()) an2n::apply_config(cfg, "env", env);
      cfg.validate();

      fs::create_directories(out_dir);
      const auto csv_path = (fs::path(out_dir) / (cfg.run_id() + ".csv")).string();
      try {
        const auto records = an2n::run_training(cfg, &std::cout);
        an2n::write_metrics(records, csv_path);
        std::cout << "wrote " << csv_path << "\n";
      } catch (const std::exception& e) {
        const auto err_path =
            (fs::path(out_dir) / (cfg.run_id() + ".error.txt")).string();
        std::ofstream(err_path) << e.what() << "\n";
        std::cerr << "train failed: " << e.what() << " (details in "
                  << err_path << ")\n";
        return 1;
      }
    } else if (*report) {
      an2n::write_report(inputs, report_out);
      std::cout << "wrote " << report_out << "/summary.csv and learning curves\n";
    } else if (*selftest) {
      return an2n::run_selftest(std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
