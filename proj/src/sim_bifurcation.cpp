#include "dynopt/sim_bifurcation.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "dynopt/errors.hpp"

namespace dynopt {

IsingProblem make_ising(Eigen::MatrixXd J) {
  if (J.rows() != J.cols()) throw ValidationError("coupling matrix must be square");
  if (J.rows() == 0) throw ValidationError("coupling matrix is empty");
  if (!J.allFinite()) throw ValidationError("coupling matrix has non-finite entries");
  if (J.diagonal().cwiseAbs().maxCoeff() != 0.0) throw ValidationError("coupling matrix diagonal must be zero");
  if ((J - J.transpose()).cwiseAbs().maxCoeff() != 0.0) throw ValidationError("coupling matrix must be symmetric");
  IsingProblem p;
  p.J = std::move(J);
  return p;
}

IsingProblem maxcut_to_ising(const WeightedGraph& g) {
  if (g.directed()) throw UnsupportedError("MAX-CUT needs an undirected graph");
  if (g.size() == 0) throw ValidationError("graph is empty");
  auto p = make_ising(-g.adjacency());
  p.from_maxcut = true;
  p.w_total = g.total_weight();
  return p;
}

namespace {

void require_spins(const IsingProblem& prob, const std::vector<std::int8_t>& s) {
  if (s.size() != prob.size()) throw ValidationError("spin vector has the wrong length");
  for (auto v : s)
    if (v != 1 && v != -1) throw ValidationError("spins must be +1 or -1");
}

}  // namespace

double ising_energy(const IsingProblem& prob, const std::vector<std::int8_t>& s) {
  require_spins(prob, s);
  const auto n = static_cast<Eigen::Index>(s.size());
  double e = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) e -= prob.J(i, j) * s[i] * s[j];
  return e;
}

double cut_value(const IsingProblem& prob, const std::vector<std::int8_t>& s) {
  if (!prob.from_maxcut) throw UnsupportedError("cut value needs a problem built from a MAX-CUT graph");
  require_spins(prob, s);
  const auto n = static_cast<Eigen::Index>(s.size());
  double pair = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) pair += -prob.J(i, j) * s[i] * s[j];
  return (prob.w_total - pair) / 2.0;
}

SpinConfig make_spin_config(const IsingProblem& prob, std::vector<std::int8_t> s) {
  SpinConfig c;
  c.energy = ising_energy(prob, s);
  if (prob.from_maxcut) c.cut = cut_value(prob, s);
  c.s = std::move(s);
  return c;
}

SpinConfig brute_force_ising(const IsingProblem& prob) {
  const std::size_t n = prob.size();
  if (n > 20) throw UnsupportedError("brute_force_ising refuses n > 20");
  std::vector<std::int8_t> s(n, 1), best = s;
  const auto& J = prob.J;
  // Gray code over s_1..s_{n-1}; h = J s tracks the local fields
  Eigen::VectorXd h = J.rowwise().sum();
  double e = -0.5 * h.sum();
  double best_e = e;
  const double tol = 1e-12 * std::max(1.0, J.cwiseAbs().sum());
  const std::uint64_t configs = n > 1 ? std::uint64_t{1} << (n - 1) : 1;
  for (std::uint64_t i = 1; i < configs; ++i) {
    const auto k = static_cast<Eigen::Index>(std::countr_zero(i) + 1);
    e += 2.0 * s[k] * h(k);
    h -= 2.0 * s[k] * J.col(k);
    s[k] = static_cast<std::int8_t>(-s[k]);
    if (e < best_e - tol) {
      best_e = e;
      best = s;
    }
  }
  return make_spin_config(prob, std::move(best));
}

void SbParams::validate() const {
  if (!(kerr > 0.0)) throw ValidationError("kerr coefficient K must be positive");
  if (!(detuning > 0.0)) throw ValidationError("detuning must be positive");
  if (xi0 && !(*xi0 > 0.0)) throw ValidationError("coupling xi0 must be positive");
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (p_final && !(*p_final > detuning)) throw ValidationError("p_final must exceed the detuning");
  if (t_steps == 0) throw ValidationError("t_steps must be positive");
  if (!(jitter >= 0.0)) throw ValidationError("jitter must be nonnegative");
}

double default_xi0(const IsingProblem& prob, double detuning) {
  // sigma_J * sqrt(n) taken as the RMS row norm of J, i.e. ||J||_F / sqrt(n)
  const auto n = static_cast<double>(prob.size());
  const double fro = prob.J.norm();
  return fro > 0.0 ? 0.7 * detuning * std::sqrt(n) / fro : 0.7 * detuning / std::sqrt(n);
}

double hamiltonian_value(const OscillatorState& st, const IsingProblem& prob, double kerr, double detuning,
                         double xi0) {
  const auto& x = st.x;
  const double local = (0.5 * detuning * st.y.array().square() + 0.25 * kerr * x.array().pow(4) +
                        0.5 * (detuning - st.p) * x.array().square())
                           .sum();
  return local - 0.5 * xi0 * x.dot(prob.J * x);
}

void sb_step(OscillatorState& st, const IsingProblem& prob, double kerr, double detuning, double xi0, double dt) {
  st.x += dt * detuning * st.y;
  const Eigen::VectorXd force =
      -(kerr * st.x.array().square() - st.p + detuning).matrix().cwiseProduct(st.x) + xi0 * (prob.J * st.x);
  st.y += dt * force;
  ++st.t;
}

namespace {

std::vector<std::int8_t> signs_of(const Eigen::VectorXd& x) {
  std::vector<std::int8_t> s(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) s[static_cast<std::size_t>(i)] = x(i) >= 0.0 ? 1 : -1;
  return s;
}

}  // namespace

SbResult sb_evolve(const IsingProblem& prob, const SbParams& params) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(prob.size());
  if (n == 0) throw ValidationError("Ising problem is empty");
  SbResult res;
  res.xi0 = params.xi0.value_or(default_xi0(prob, params.detuning));
  res.p_final = params.p_final.value_or(2.0 * params.detuning);
  if (!(res.p_final > params.detuning)) throw ValidationError("p_final must exceed the detuning");

  OscillatorState st;
  st.x = Eigen::VectorXd::Zero(n);
  st.y = Eigen::VectorXd::Zero(n);
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> kick(-params.jitter, params.jitter);
  for (Eigen::Index i = 0; i < n; ++i) st.y(i) = kick(rng);

  const double limit = 10.0 * std::sqrt(res.p_final / params.kerr);
  const auto steps = static_cast<double>(params.t_steps);
  bool have_best = false;
  if (params.record_every) res.samples.push_back(st);
  for (std::size_t t = 1; t <= params.t_steps; ++t) {
    sb_step(st, prob, params.kerr, params.detuning, res.xi0, params.dt);
    st.p = res.p_final * static_cast<double>(t) / steps;
    const double amp = st.x.cwiseAbs().maxCoeff();
    if (!std::isfinite(amp) || amp > limit) {
      throw NumericalError("oscillator amplitude left the stable range at step " + std::to_string(t) +
                           "; reduce dt");
    }
    if (params.track_best) {
      const double e = ising_energy(prob, signs_of(st.x));
      if (!have_best || e < res.best.energy) {
        res.best = make_spin_config(prob, signs_of(st.x));
        have_best = true;
      }
    }
    if (params.record_every && t % params.record_every == 0) res.samples.push_back(st);
  }
  res.final_spins = make_spin_config(prob, signs_of(st.x));
  if (!params.track_best) res.best = res.final_spins;
  res.final_state = std::move(st);
  return res;
}

SbRestarts sb_solve(const IsingProblem& prob, const SbParams& params, std::size_t restarts) {
  if (restarts == 0) throw ValidationError("restarts must be positive");
  SbRestarts out;
  for (std::size_t r = 0; r < restarts; ++r) {
    SbParams p = params;
    p.seed = params.seed + r;
    auto res = sb_evolve(prob, p);
    out.energies.push_back(res.best.energy);
    if (r == 0 || res.best.energy < out.best.best.energy) {
      out.best = std::move(res);
      out.best_restart = r;
    }
  }
  return out;
}

}  // namespace dynopt
