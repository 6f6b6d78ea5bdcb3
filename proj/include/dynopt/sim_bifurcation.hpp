#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dynopt/graph.hpp"

namespace dynopt {

struct IsingProblem {
  Eigen::MatrixXd J;  // symmetric, zero diagonal
  bool from_maxcut = false;
  double w_total = 0.0;  // sum_{i<j} w_ij when from_maxcut

  std::size_t size() const noexcept { return static_cast<std::size_t>(J.rows()); }
};

/// Validates symmetry and the zero diagonal.
IsingProblem make_ising(Eigen::MatrixXd J);
/// J = -W. Directed graphs are rejected.
IsingProblem maxcut_to_ising(const WeightedGraph& g);

struct SpinConfig {
  std::vector<std::int8_t> s;
  double energy = 0.0;
  std::optional<double> cut;  // set for MAX-CUT problems
};

/// E = -1/2 sum_ij J_ij s_i s_j
double ising_energy(const IsingProblem& prob, const std::vector<std::int8_t>& s);
/// (W_total - sum_{i<j} w_ij s_i s_j) / 2; needs a MAX-CUT problem.
double cut_value(const IsingProblem& prob, const std::vector<std::int8_t>& s);
SpinConfig make_spin_config(const IsingProblem& prob, std::vector<std::int8_t> s);

/// Exact ground state over 2^(n-1) configurations with s_0 = +1; refuses n > 20.
SpinConfig brute_force_ising(const IsingProblem& prob);

struct SbParams {
  double kerr = 1.0;
  double detuning = 1.0;
  std::optional<double> xi0;      // default_xi0 when unset
  std::optional<double> p_final;  // 2 * detuning when unset
  double dt = 0.05;
  std::size_t t_steps = 2000;
  double jitter = 1e-6;  // amplitude of the uniform kick added to y at t = 0
  std::uint64_t seed = 0;
  std::size_t record_every = 0;  // 0 records nothing
  bool track_best = true;

  /// Throws ValidationError on out-of-range values.
  void validate() const;
};

/// 0.7 * detuning / (sigma_J * sqrt(n)) with sigma_J * sqrt(n) = ||J||_F / sqrt(n), the RMS row norm.
/// Zero couplings fall back to sigma_J = 1.
double default_xi0(const IsingProblem& prob, double detuning = 1.0);

struct OscillatorState {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  double p = 0.0;
  std::size_t t = 0;
};

/// H = sum_i [D/2 y^2 + K/4 x^4 + (D - p)/2 x^2] - xi0/2 sum_ij J_ij x_i x_j
double hamiltonian_value(const OscillatorState& st, const IsingProblem& prob, double kerr, double detuning, double xi0);

/// One symplectic Euler step at the state's pump p: x from the current y, then y from the new x.
void sb_step(OscillatorState& st, const IsingProblem& prob, double kerr, double detuning, double xi0, double dt);

struct SbResult {
  SpinConfig final_spins;
  SpinConfig best;  // lowest energy seen; equals final_spins when tracking is off
  OscillatorState final_state;
  std::vector<OscillatorState> samples;
  double xi0 = 0.0;
  double p_final = 0.0;
};

/// Pump ramps linearly from 0 to p_final over t_steps; spins are sign(x) with sign(0) = +1.
/// Throws NumericalError when |x| exceeds 10 sqrt(p_final / K).
SbResult sb_evolve(const IsingProblem& prob, const SbParams& params);

struct SbRestarts {
  SbResult best;
  std::size_t best_restart = 0;
  std::vector<double> energies;  // best energy per restart
};

/// Independent runs with seeds seed, seed + 1, ...; keeps the lowest energy (earliest on ties).
SbRestarts sb_solve(const IsingProblem& prob, const SbParams& params, std::size_t restarts);

}  // namespace dynopt
