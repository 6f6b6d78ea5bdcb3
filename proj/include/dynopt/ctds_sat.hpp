#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dynopt {

struct Literal {
  std::uint32_t var = 0;     // 0-based
  std::int8_t polarity = 1;  // c_mi: +1 for x_i, -1 for not x_i
};

using Clause = std::vector<Literal>;

struct CnfFormula {
  std::size_t n_vars = 0;
  std::vector<Clause> clauses;
  std::size_t k_max = 0;
  std::vector<std::string> warnings;

  std::size_t n_clauses() const noexcept { return clauses.size(); }
  double alpha() const noexcept {
    return n_vars ? static_cast<double>(clauses.size()) / static_cast<double>(n_vars) : 0.0;
  }
};

/// Normalizes clauses: repeated literals are merged, tautologies dropped with a warning.
/// Throws ValidationError for empty clauses or out-of-range variables.
CnfFormula make_formula(std::size_t n_vars, std::vector<Clause> clauses);

/// DIMACS CNF. Comments ('c') anywhere, clauses may span lines, a '%' line ends the input.
CnfFormula read_cnf(std::istream& in);
CnfFormula load_cnf(const std::filesystem::path& path);

/// Number of satisfied clauses, Phi(x).
std::size_t evaluate_assignment(const CnfFormula& f, const std::vector<std::uint8_t>& x);
/// x_i = (sign(s_i) + 1) / 2 with sign(0) = +1.
std::vector<std::uint8_t> round_assignment(const Eigen::VectorXd& s);

struct ClauseTerm {
  double K = 0.0;
  std::vector<std::pair<std::uint32_t, double>> grad;  // dK/ds_i per literal of the clause
};

/// K_m = 2^-k prod (1 - c_mi s_i) and its gradient. Requires s in [-1, 1].
ClauseTerm clause_term(const CnfFormula& f, std::size_t m, const Eigen::VectorXd& s);

/// V = sum_m a_m K_m^2
double energy(const CnfFormula& f, const Eigen::VectorXd& s, const Eigen::VectorXd& a);
Eigen::VectorXd energy_gradient(const CnfFormula& f, const Eigen::VectorXd& s, const Eigen::VectorXd& a);

struct CtdsState {
  Eigen::VectorXd s;
  Eigen::VectorXd a;
  double t = 0.0;  // integration clock, see ctds_step
};

/// s uniform in (-1, 1) from `seed`, a = 1.
CtdsState initial_state(const CnfFormula& f, std::uint64_t seed);

/// One RK4 step of ds/dt = -dV/ds, da/dt = a K (frozen when `freeze_a`), then s clamped to [-1, 1].
/// Both right-hand sides are divided by g = max(1, dt |dV/ds|_inf / max_ds): the orbits are those of
/// the raw system, traversed in a clock that keeps fixed steps stable once a has grown large.
void ctds_step(const CnfFormula& f, CtdsState& st, double dt, bool freeze_a = false, double max_ds = 0.1);

struct CtdsParams {
  double dt = 0.05;
  double t_budget = 500.0;  // 10^4 steps at the default dt
  double a_cap = 1e12;
  double max_ds = 0.1;  // step limiter, see ctds_step
  std::uint64_t seed = 0;
  std::size_t record_every = 100;  // V trace stride in steps; 0 disables

  void validate() const;
};

enum class SatStatus { Sat, Unknown };

struct SatOutcome {
  SatStatus status = SatStatus::Unknown;
  std::vector<std::uint8_t> best_assignment;
  std::size_t best_satisfied = 0;
  std::size_t steps = 0;
  double time = 0.0;
  std::vector<std::pair<double, double>> v_trace;  // (t, V)
  std::size_t a_rescales = 0;
  double log_a_max = 0.0;  // log of the largest a_m, rescales included
  double wall_seconds = 0.0;
};

/// Integrates until a rounding satisfies every clause or the budget runs out. A Sat status is
/// only returned after evaluate_assignment confirms the assignment.
SatOutcome ctds_solve(const CnfFormula& f, const CtdsParams& params);

struct FsleParams {
  double delta0 = 1e-6;
  double delta1 = 1e-2;
  std::size_t n_pairs = 20;
  double t_max = 200.0;  // per pair
};

struct FsleEstimate {
  double exponent = 0.0;  // ln(delta1 / delta0) / mean tau over uncensored pairs
  // mean of ln(sep / delta0) / t over all pairs, censored ones at the time they stopped
  double mean_rate = 0.0;
  double ci_low = 0.0;  // 95% normal interval for mean_rate
  double ci_high = 0.0;
  std::vector<double> taus;
  std::size_t censored_converged = 0;
  std::size_t censored_satisfied = 0;
  std::size_t censored_timeout = 0;
};

/// Pairs start at initial_state(seed + p) and a copy displaced by delta0 along a random
/// direction in s. exponent stays 0 when every pair is censored.
FsleEstimate fsle_measure(const CnfFormula& f, const CtdsParams& params, const FsleParams& fp);
/// fsle_measure, but throws PreconditionError with the censoring counts when every pair is censored.
FsleEstimate fsle_estimate(const CnfFormula& f, const CtdsParams& params, const FsleParams& fp);

}  // namespace dynopt
