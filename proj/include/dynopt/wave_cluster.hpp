#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynopt/graph.hpp"
#include "dynopt/laplacian.hpp"

namespace dynopt {

struct WaveParams {
  double c = 1.41;  // wave speed, 0 < c < sqrt(2)
  std::size_t k = 1;  // number of eigenvectors (sign bits)
  std::size_t t_max = 1024;
  double peak_rel_threshold = 3e-4;  // relative to the largest non-DC spectral magnitude
  std::uint64_t seed = 0;

  /// Throws ValidationError unless 0 < c < sqrt(2), k >= 1 and t_max >= 4k.
  void validate() const;
};

/// Two-level state of the graph wave equation plus the recorded time series.
/// Column t-1 of `history` holds u(t); u(0) itself is not recorded.
struct WaveState {
  Eigen::VectorXd u_prev;
  Eigen::VectorXd u_curr;
  Eigen::MatrixXd history;
  std::size_t length = 0;

  /// u(-1) = u(0) = u0. `capacity` preallocates history columns (0 disables recording).
  static WaveState start(const Eigen::VectorXd& u0, std::size_t capacity);

  bool recording() const noexcept { return history.cols() > 0; }
  auto recorded() const { return history.leftCols(static_cast<Eigen::Index>(length)); }
};

/// One synchronous update u(t) = 2u(t-1) - u(t-2) - c^2 L u(t-1).
/// The stability condition on c is the caller's business; only dimensions are checked.
WaveState wave_step(WaveState state, const NormalizedLaplacian& L, double c);

/// Iteration budget from the mixing-time bound:
/// ceil(c_freq / arccos((2 + c^2 (e^{-1/tau} - 1)) / 2)) + ceil(c_lin * n).
std::size_t t_max_bound(double tau, double c, std::size_t n, double c_freq = 10.0, double c_lin = 1.0);

struct ClusterAssignment {
  std::vector<std::uint32_t> labels;
  /// n x k sign bits; bit j of node i is signs(i, j).
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> signs;
  std::vector<double> frequencies;  // radians per step, empty for the dense reference
  std::vector<double> eigenvalue_estimates;
  std::vector<std::string> warnings;
  std::size_t restarts = 0;
};

/// Decentralized wave-equation clustering simulated synchronously.
/// Throws PreconditionError for disconnected graphs and InsufficientResolution when
/// fewer than k spectral peaks clear the threshold after one re-randomization.
ClusterAssignment run_wave_clustering(const WeightedGraph& g, const WaveParams& params);
ClusterAssignment run_wave_clustering(const NormalizedLaplacian& L, const WaveParams& params);

/// (I - L)^steps u0, the heat-equation (random walk) baseline.
Eigen::VectorXd heat_iterate(const NormalizedLaplacian& L, const Eigen::VectorXd& u0, std::size_t steps);

/// Signs of v^(2)..v^(k+1) from the dense spectrum, assembled with the same binary rule.
ClusterAssignment spectral_reference(const WeightedGraph& g, std::size_t k);

/// labels_i = sum_j bit(i, j) 2^j
std::vector<std::uint32_t> assemble_labels(const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& bits);

/// Fraction of nodes on which two labelings agree, maximized over relabelings of `b`.
double label_agreement(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

}  // namespace dynopt
