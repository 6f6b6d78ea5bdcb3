#pragma once

// Random k-SAT generation and a complete DPLL solver used to certify test instances.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dynopt/ctds_sat.hpp"

namespace dynopt::testing {

/// m clauses over n variables, each with k distinct variables and fair random signs.
inline CnfFormula random_ksat(std::size_t n, std::size_t m, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> var(0, static_cast<std::uint32_t>(n - 1));
  std::bernoulli_distribution neg(0.5);
  std::vector<Clause> clauses(m);
  for (auto& c : clauses) {
    while (c.size() < k) {
      const auto v = var(rng);
      bool dup = false;
      for (const auto& l : c) dup |= l.var == v;
      if (!dup) c.push_back({v, static_cast<std::int8_t>(neg(rng) ? -1 : 1)});
    }
  }
  return make_formula(n, std::move(clauses));
}

/// Clause checker written against DIMACS-style signed literals, separate from evaluate_assignment.
inline std::size_t count_satisfied(const CnfFormula& f, const std::vector<std::uint8_t>& x) {
  std::size_t count = 0;
  for (const auto& c : f.clauses) {
    bool any = false;
    for (const auto& l : c) {
      const long long lit = (static_cast<long long>(l.var) + 1) * l.polarity;
      any = any || (lit > 0 ? x[l.var] == 1 : x[l.var] == 0);
    }
    count += any;
  }
  return count;
}

namespace detail {

// values: -1 unassigned, 0 false, 1 true
inline bool dpll(const CnfFormula& f, std::vector<int>& val) {
  // unit propagation to a fixed point
  std::vector<std::size_t> trail;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : f.clauses) {
      int free = 0;
      const Literal* last = nullptr;
      bool sat = false;
      for (const auto& l : c) {
        const int v = val[l.var];
        if (v < 0) ++free, last = &l;
        else if ((v == 1) == (l.polarity > 0)) sat = true;
      }
      if (sat) continue;
      if (free == 0) {
        for (auto v : trail) val[v] = -1;
        return false;
      }
      if (free == 1) {
        val[last->var] = last->polarity > 0 ? 1 : 0;
        trail.push_back(last->var);
        changed = true;
      }
    }
  }
  // branch on the most frequent unassigned variable in unsatisfied clauses
  std::vector<int> score(f.n_vars, 0);
  for (const auto& c : f.clauses) {
    bool sat = false;
    for (const auto& l : c) sat |= val[l.var] >= 0 && (val[l.var] == 1) == (l.polarity > 0);
    if (!sat)
      for (const auto& l : c)
        if (val[l.var] < 0) ++score[l.var];
  }
  std::size_t pick = f.n_vars;
  for (std::size_t i = 0; i < f.n_vars; ++i)
    if (val[i] < 0 && (pick == f.n_vars || score[i] > score[pick])) pick = i;
  if (pick == f.n_vars) return true;
  for (int b : {1, 0}) {
    val[pick] = b;
    if (dpll(f, val)) return true;
  }
  val[pick] = -1;
  for (auto v : trail) val[v] = -1;
  return false;
}

}  // namespace detail

/// Complete check; returns a satisfying assignment or nothing when the formula is UNSAT.
inline std::optional<std::vector<std::uint8_t>> dpll_solve(const CnfFormula& f) {
  std::vector<int> val(f.n_vars, -1);
  if (!detail::dpll(f, val)) return std::nullopt;
  std::vector<std::uint8_t> x(f.n_vars);
  for (std::size_t i = 0; i < f.n_vars; ++i) x[i] = val[i] == 1 ? 1 : 0;
  return x;
}

/// Satisfiable instances from consecutive seeds starting at `seed`.
inline std::vector<CnfFormula> satisfiable_pool(std::size_t count, std::size_t n, std::size_t m, std::uint64_t seed) {
  std::vector<CnfFormula> pool;
  for (std::uint64_t s = seed; pool.size() < count; ++s) {
    auto f = random_ksat(n, m, 3, s);
    if (dpll_solve(f)) pool.push_back(std::move(f));
  }
  return pool;
}

}  // namespace dynopt::testing
