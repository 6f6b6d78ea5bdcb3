#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace dynopt {

/// Square linear assignment maximizing sum_i w(i, sigma(i)).
/// Returns sigma as row -> column. Among optimal assignments, ties are
/// resolved toward lower column indices for lower rows (pairwise-swap canonical form).
std::vector<std::size_t> max_weight_assignment(const Eigen::MatrixXd& w);

}  // namespace dynopt
