#pragma once

#include <string>
#include <vector>

#include "an2n/harness.hpp"

namespace an2n {

struct SummaryRow {
  std::string env;
  std::string arm;  // "ddpg", "ddpg+an2n", "sac", "sac+an2n"
  double final_mean = 0.0;  // across seeds, of the final-epoch eval return
  double final_std = 0.0;   // population std across seeds
  int seeds = 0;
};

/// Aggregates per-(env, arm): every seed must cover the same step grid, every
/// env the same arm set, and no (env, arm, seed) may appear twice; violations
/// throw with a listing.
std::vector<SummaryRow> summarize(const std::vector<MetricsRecord>& records);

/// Reads every *.csv under the input directories (or explicit .csv paths) and
/// writes summary.csv plus one curves_<env>.svg per environment: mean eval
/// return vs step per arm with a +-1 std band across seeds.
void write_report(const std::vector<std::string>& inputs,
                  const std::string& out_dir);

}  // namespace an2n
