#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace an2n {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Precondition check used across the library: throws std::invalid_argument
/// with a short diagnostic instead of asserting.
inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace an2n
