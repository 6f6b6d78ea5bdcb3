#include "dynopt/ctds_sat.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dynopt/errors.hpp"

namespace dynopt {

CnfFormula make_formula(std::size_t n_vars, std::vector<Clause> clauses) {
  CnfFormula f;
  f.n_vars = n_vars;
  for (std::size_t m = 0; m < clauses.size(); ++m) {
    auto& c = clauses[m];
    if (c.empty()) throw ValidationError("clause " + std::to_string(m + 1) + " is empty");
    std::sort(c.begin(), c.end(), [](const Literal& a, const Literal& b) {
      return a.var != b.var ? a.var < b.var : a.polarity < b.polarity;
    });
    bool tautology = false;
    Clause out;
    for (const auto& l : c) {
      if (l.var >= n_vars) throw ValidationError("clause " + std::to_string(m + 1) + " uses an undeclared variable");
      if (l.polarity != 1 && l.polarity != -1) throw ValidationError("literal polarity must be +1 or -1");
      if (!out.empty() && out.back().var == l.var) {
        if (out.back().polarity != l.polarity) tautology = true;
        continue;
      }
      out.push_back(l);
    }
    if (tautology) {
      f.warnings.push_back("clause " + std::to_string(m + 1) + " is a tautology and was dropped");
      continue;
    }
    if (out.size() != c.size()) f.warnings.push_back("clause " + std::to_string(m + 1) + " repeats a literal");
    f.k_max = std::max(f.k_max, out.size());
    f.clauses.push_back(std::move(out));
  }
  return f;
}

CnfFormula read_cnf(std::istream& in) {
  std::string buf;
  std::size_t line = 0;
  long long n = -1, m = -1;
  std::vector<Clause> clauses;
  Clause cur;
  std::size_t cur_line = 0;
  while (std::getline(in, buf)) {
    ++line;
    const auto first = buf.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (buf[first] == 'c') continue;
    if (buf[first] == '%') break;
    if (buf[first] == 'p') {
      if (n >= 0) throw ParseError("second problem line", line);
      std::istringstream ls(buf.substr(first));
      std::string p, fmt, extra;
      if (!(ls >> p >> fmt >> n >> m) || p != "p" || fmt != "cnf" || n < 0 || m < 0 || (ls >> extra)) {
        throw ParseError("malformed problem line, expected 'p cnf <vars> <clauses>'", line);
      }
      continue;
    }
    if (n < 0) throw ParseError("clause before the problem line", line);
    std::istringstream ls(buf);
    std::string tok;
    while (ls >> tok) {
      long long v = 0;
      try {
        std::size_t used = 0;
        v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError("malformed literal '" + tok + "'", line);
      }
      if (v == 0) {
        if (cur.empty()) throw ParseError("empty clause", line);
        clauses.push_back(std::move(cur));
        cur.clear();
        continue;
      }
      if (std::llabs(v) > n) throw ParseError("literal " + tok + " exceeds the declared variable count", line);
      if (cur.empty()) cur_line = line;
      cur.push_back({static_cast<std::uint32_t>(std::llabs(v) - 1), static_cast<std::int8_t>(v > 0 ? 1 : -1)});
    }
  }
  if (n < 0) throw ParseError("missing problem line");
  if (!cur.empty()) throw ParseError("last clause is not terminated by 0", cur_line);
  if (static_cast<long long>(clauses.size()) != m) {
    throw ParseError("problem line declares " + std::to_string(m) + " clauses, found " +
                     std::to_string(clauses.size()));
  }
  return make_formula(static_cast<std::size_t>(n), std::move(clauses));
}

CnfFormula load_cnf(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CNF file '" + path.string() + "'");
  return read_cnf(in);
}

std::size_t evaluate_assignment(const CnfFormula& f, const std::vector<std::uint8_t>& x) {
  if (x.size() != f.n_vars) throw ValidationError("assignment has the wrong length");
  std::size_t sat = 0;
  for (const auto& c : f.clauses) {
    for (const auto& l : c) {
      if ((x[l.var] != 0) == (l.polarity > 0)) {
        ++sat;
        break;
      }
    }
  }
  return sat;
}

std::vector<std::uint8_t> round_assignment(const Eigen::VectorXd& s) {
  std::vector<std::uint8_t> x(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) x[static_cast<std::size_t>(i)] = s(i) >= 0.0 ? 1 : 0;
  return x;
}

namespace {

void require_state(const CnfFormula& f, const Eigen::VectorXd& s) {
  if (static_cast<std::size_t>(s.size()) != f.n_vars) throw ValidationError("state has the wrong length");
  if (!s.allFinite() || s.cwiseAbs().maxCoeff() > 1.0) throw ValidationError("s must lie in [-1, 1]");
}

// K_m, plus dV/ds accumulated into `grad` with weight 2 a_m K_m when grad is non-null
double clause_value(const Clause& c, const Eigen::VectorXd& s, double weight, Eigen::VectorXd* grad) {
  const double scale = std::ldexp(1.0, -static_cast<int>(c.size()));
  double K = scale;
  for (const auto& l : c) K *= 1.0 - l.polarity * s(l.var);
  if (grad && K != 0.0) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      double rest = scale;
      for (std::size_t j = 0; j < c.size(); ++j)
        if (j != i) rest *= 1.0 - c[j].polarity * s(c[j].var);
      (*grad)(c[i].var) += weight * K * -c[i].polarity * rest;
    }
  }
  return K;
}

}  // namespace

ClauseTerm clause_term(const CnfFormula& f, std::size_t m, const Eigen::VectorXd& s) {
  require_state(f, s);
  const auto& c = f.clauses.at(m);
  const double scale = std::ldexp(1.0, -static_cast<int>(c.size()));
  ClauseTerm t;
  t.K = clause_value(c, s, 0.0, nullptr);
  for (std::size_t i = 0; i < c.size(); ++i) {
    double rest = scale;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (j != i) rest *= 1.0 - c[j].polarity * s(c[j].var);
    t.grad.emplace_back(c[i].var, -c[i].polarity * rest);
  }
  return t;
}

double energy(const CnfFormula& f, const Eigen::VectorXd& s, const Eigen::VectorXd& a) {
  require_state(f, s);
  if (static_cast<std::size_t>(a.size()) != f.n_clauses()) throw ValidationError("a has the wrong length");
  double v = 0.0;
  for (std::size_t m = 0; m < f.n_clauses(); ++m) {
    const double K = clause_value(f.clauses[m], s, 0.0, nullptr);
    v += a(static_cast<Eigen::Index>(m)) * K * K;
  }
  return v;
}

Eigen::VectorXd energy_gradient(const CnfFormula& f, const Eigen::VectorXd& s, const Eigen::VectorXd& a) {
  require_state(f, s);
  if (static_cast<std::size_t>(a.size()) != f.n_clauses()) throw ValidationError("a has the wrong length");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(s.size());
  for (std::size_t m = 0; m < f.n_clauses(); ++m) clause_value(f.clauses[m], s, 2.0 * a(static_cast<Eigen::Index>(m)), &g);
  return g;
}

CtdsState initial_state(const CnfFormula& f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CtdsState st;
  st.s.resize(static_cast<Eigen::Index>(f.n_vars));
  for (Eigen::Index i = 0; i < st.s.size(); ++i) st.s(i) = u(rng);
  st.a = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(f.n_clauses()));
  return st;
}

namespace {

struct Rhs {
  Eigen::VectorXd ds;
  Eigen::VectorXd da;
};

void rhs(const CnfFormula& f, const Eigen::VectorXd& s, const Eigen::VectorXd& a, bool freeze_a, double dt,
         double max_ds, Rhs& out) {
  out.ds.setZero(s.size());
  out.da.resize(a.size());
  for (std::size_t m = 0; m < f.n_clauses(); ++m) {
    const auto mi = static_cast<Eigen::Index>(m);
    const double K = clause_value(f.clauses[m], s, 2.0 * a(mi), &out.ds);
    out.da(mi) = freeze_a ? 0.0 : a(mi) * K;
  }
  // time change dtau = g dt with g >= 1 chosen so no s_i moves more than max_ds per step;
  // orbits are unchanged, only the clock slows where a has made the field stiff
  const double speed = out.ds.size() ? out.ds.cwiseAbs().maxCoeff() : 0.0;
  const double g = std::max(1.0, dt * speed / max_ds);
  out.ds /= -g;
  out.da /= g;
}

}  // namespace

void ctds_step(const CnfFormula& f, CtdsState& st, double dt, bool freeze_a, double max_ds) {
  if (!(max_ds > 0.0)) throw ValidationError("max_ds must be positive");
  Rhs k1, k2, k3, k4;
  rhs(f, st.s, st.a, freeze_a, dt, max_ds, k1);
  rhs(f, st.s + 0.5 * dt * k1.ds, st.a + 0.5 * dt * k1.da, freeze_a, dt, max_ds, k2);
  rhs(f, st.s + 0.5 * dt * k2.ds, st.a + 0.5 * dt * k2.da, freeze_a, dt, max_ds, k3);
  rhs(f, st.s + dt * k3.ds, st.a + dt * k3.da, freeze_a, dt, max_ds, k4);
  st.s += (dt / 6.0) * (k1.ds + 2.0 * k2.ds + 2.0 * k3.ds + k4.ds);
  st.a += (dt / 6.0) * (k1.da + 2.0 * k2.da + 2.0 * k3.da + k4.da);
  st.s = st.s.cwiseMax(-1.0).cwiseMin(1.0);
  st.t += dt;
  if (!st.s.allFinite() || !st.a.allFinite()) throw NumericalError("CTDS integration diverged; reduce dt");
}

void CtdsParams::validate() const {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(t_budget >= 0.0)) throw ValidationError("time budget must be nonnegative");
  if (!(a_cap > 1.0)) throw ValidationError("a_cap must exceed 1");
  if (!(max_ds > 0.0)) throw ValidationError("max_ds must be positive");
}

SatOutcome ctds_solve(const CnfFormula& f, const CtdsParams& params) {
  params.validate();
  const auto start = std::chrono::steady_clock::now();
  SatOutcome out;
  auto st = initial_state(f, params.seed);
  const auto steps = static_cast<std::size_t>(std::ceil(params.t_budget / params.dt - 1e-9));
  const std::size_t m = f.n_clauses();
  double log_scale = 0.0;

  auto check = [&] {
    auto x = round_assignment(st.s);
    const auto sat = evaluate_assignment(f, x);
    if (sat > out.best_satisfied || out.best_assignment.empty()) {
      out.best_satisfied = sat;
      out.best_assignment = std::move(x);
    }
    return sat == m;
  };

  bool solved = check();
  if (params.record_every) out.v_trace.emplace_back(0.0, energy(f, st.s, st.a));
  for (std::size_t k = 1; k <= steps && !solved; ++k) {
    ctds_step(f, st, params.dt, false, params.max_ds);
    out.steps = k;
    if (m > 0) {
      const double top = st.a.maxCoeff();
      if (top > params.a_cap) {
        st.a /= top;
        log_scale += std::log(top);
        ++out.a_rescales;
      }
    }
    solved = check();
    if (params.record_every && (k % params.record_every == 0 || solved || k == steps)) {
      out.v_trace.emplace_back(st.t, energy(f, st.s, st.a));
    }
  }
  out.time = st.t;
  out.log_a_max = log_scale + (m ? std::log(st.a.maxCoeff()) : 0.0);
  // soundness: re-verify independently of the loop bookkeeping
  if (solved && evaluate_assignment(f, out.best_assignment) == m) out.status = SatStatus::Sat;
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

FsleEstimate fsle_measure(const CnfFormula& f, const CtdsParams& params, const FsleParams& fp) {
  params.validate();
  if (!(fp.delta0 > 0.0 && fp.delta1 > fp.delta0)) throw ValidationError("FSLE needs delta1 > delta0 > 0");
  if (fp.n_pairs == 0) throw ValidationError("FSLE needs at least one pair");
  if (!(fp.t_max > 0.0)) throw ValidationError("FSLE t_max must be positive");
  const std::size_t m = f.n_clauses();
  const double floor = 1e-3 * fp.delta0;
  const double ratio = std::log(fp.delta1 / fp.delta0);
  const auto max_steps = static_cast<std::size_t>(std::ceil(fp.t_max / params.dt));

  FsleEstimate est;
  std::vector<double> rates;
  for (std::size_t p = 0; p < fp.n_pairs; ++p) {
    auto ref = initial_state(f, params.seed + p);
    std::mt19937_64 rng(params.seed + p + 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd dir(ref.s.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = g(rng);
    auto other = ref;
    other.s = (ref.s + fp.delta0 * dir.normalized()).cwiseMax(-1.0).cwiseMin(1.0);

    double sep = (other.s - ref.s).norm();
    bool done = false;
    for (std::size_t k = 1; k <= max_steps && !done; ++k) {
      ctds_step(f, ref, params.dt, false, params.max_ds);
      ctds_step(f, other, params.dt, false, params.max_ds);
      sep = (other.s - ref.s).norm();
      const double t = ref.t;
      if (sep >= fp.delta1) {
        est.taus.push_back(t);
        rates.push_back(std::log(sep / fp.delta0) / t);
        done = true;
      } else if (sep < floor) {
        ++est.censored_converged;
        rates.push_back(std::log(floor / fp.delta0) / t);
        done = true;
      } else if (evaluate_assignment(f, round_assignment(ref.s)) == m ||
                 evaluate_assignment(f, round_assignment(other.s)) == m) {
        ++est.censored_satisfied;
        rates.push_back(std::log(sep / fp.delta0) / t);
        done = true;
      }
    }
    if (!done) {
      ++est.censored_timeout;
      rates.push_back(std::log(sep / fp.delta0) / ref.t);
    }
  }
  double mean_tau = 0.0;
  for (double t : est.taus) mean_tau += t;
  if (!est.taus.empty()) est.exponent = ratio * static_cast<double>(est.taus.size()) / mean_tau;

  const auto n = static_cast<double>(rates.size());
  for (double r : rates) est.mean_rate += r;
  est.mean_rate /= n;
  double var = 0.0;
  for (double r : rates) var += (r - est.mean_rate) * (r - est.mean_rate);
  const double se = rates.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : INFINITY;
  est.ci_low = est.mean_rate - 1.96 * se;
  est.ci_high = est.mean_rate + 1.96 * se;
  return est;
}

FsleEstimate fsle_estimate(const CnfFormula& f, const CtdsParams& params, const FsleParams& fp) {
  auto est = fsle_measure(f, params, fp);
  if (est.taus.empty()) {
    throw PreconditionError("FSLE undefined: all " + std::to_string(fp.n_pairs) + " pairs censored (" +
                            std::to_string(est.censored_converged) + " converged, " +
                            std::to_string(est.censored_satisfied) + " satisfied, " +
                            std::to_string(est.censored_timeout) + " timed out)");
  }
  return est;
}

}  // namespace dynopt
