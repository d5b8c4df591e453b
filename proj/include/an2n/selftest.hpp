#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "an2n/types.hpp"

namespace an2n {

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Backward n-step sweep vs an O(T^2) brute-force discounted sum on 1000
/// random trajectories, relative error <= 1e-12.
SuiteResult nstep_oracle_suite();

/// DDPG critic/actor and SAC actor gradients (frozen reparameterization
/// noise) vs central finite differences, 20 random parameter points each.
SuiteResult gradient_fd_suite();

using CosineFn =
    std::function<double(const Vector&, const Vector&, const Vector&)>;
using ManhattanFn = std::function<double(const Vector&, const Vector&)>;

/// Range / symmetry / identity / scale-invariance checks over 1e4 random
/// vector pairs. The injectable variant exists so a deliberately broken
/// metric can be shown to fail the suite.
SuiteResult similarity_suite();
SuiteResult similarity_suite_with(const CosineFn& cosine,
                                  const ManhattanFn& manhattan);

/// Closed-loop threshold adaptation on a stationary uniform similarity
/// stream: window fraction within +-0.05 of each target by call 5000, plus
/// the exact schedule endpoints.
SuiteResult controller_suite();

/// key_state_count vs direct formula evaluation on a 100-point grid,
/// including the degenerate-sign guard; exact integer match.
SuiteResult clip_formula_suite();

/// 1e5 random admit/resize operations vs a reference deque model.
SuiteResult queue_model_suite();

/// Two identical small training runs must produce byte-identical metrics.
SuiteResult determinism_suite();

std::vector<SuiteResult> selftest_suites();

/// Prints one pass/fail line per suite; returns 0 iff everything passed.
int run_selftest(std::ostream& os);

}  // namespace an2n
