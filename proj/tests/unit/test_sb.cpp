#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dynopt/errors.hpp"
#include "dynopt/graph.hpp"
#include "dynopt/sim_bifurcation.hpp"
#include "support/generators.hpp"

using namespace dynopt;

namespace {

std::vector<std::int8_t> spins_from_bits(std::uint64_t bits, std::size_t n) {
  std::vector<std::int8_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = (bits >> i) & 1 ? -1 : 1;
  return s;
}

// enumeration over all 2^n configurations, no symmetry reduction
double exhaustive_ground_energy(const IsingProblem& p) {
  double best = INFINITY;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << p.size()); ++b)
    best = std::min(best, ising_energy(p, spins_from_bits(b, p.size())));
  return best;
}

std::vector<WeightedGraph> benchmark_graphs() {
  std::vector<WeightedGraph> g{load_graph(DYNOPT_FIXTURE_DIR "/triangle.rudy", GraphFormat::Rudy),
                               load_graph(DYNOPT_FIXTURE_DIR "/k4.rudy", GraphFormat::Rudy), testing::cycle_graph(5),
                               testing::petersen_graph()};
  for (std::uint64_t s = 100; s < 110; ++s) g.push_back(testing::gnp(12, 0.5, s));
  return g;
}

}  // namespace

TEST_CASE("ising energy and cut: hand cases") {
  auto zero = make_ising(Eigen::MatrixXd::Zero(3, 3));
  CHECK(ising_energy(zero, {1, -1, 1}) == 0.0);

  auto tri = maxcut_to_ising(testing::complete_graph(3));
  CHECK(tri.from_maxcut);
  CHECK(tri.w_total == 3.0);
  CHECK(ising_energy(tri, {1, 1, -1}) == -1.0);
  CHECK(cut_value(tri, {1, 1, -1}) == 2.0);
  CHECK(ising_energy(tri, {1, 1, 1}) == 3.0);
  CHECK(cut_value(tri, {1, 1, 1}) == 0.0);

  CHECK_THROWS_AS(ising_energy(tri, {1, 0, 1}), ValidationError);
  CHECK_THROWS_AS(ising_energy(tri, {1, 1}), ValidationError);
  CHECK_THROWS_AS(cut_value(zero, {1, 1, 1}), UnsupportedError);
  CHECK_THROWS_AS(maxcut_to_ising(WeightedGraph(2, {{0, 1, 1.0}}, true)), UnsupportedError);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
  asym(0, 1) = 1;
  CHECK_THROWS_AS(make_ising(asym), ValidationError);
  CHECK_THROWS_AS(make_ising(Eigen::MatrixXd::Identity(2, 2)), ValidationError);
}

TEST_CASE("property: cut/energy identity and global flip symmetry on every configuration") {
  std::mt19937_64 rng(5);
  std::vector<WeightedGraph> graphs = benchmark_graphs();
  std::uniform_real_distribution<double> w(0.5, 2.0);
  std::vector<Edge> e;
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = i + 1; j < 9; ++j)
      if (rng() % 2) e.push_back({i, j, std::round(w(rng) * 8) / 8});  // dyadic weights stay exact
  graphs.emplace_back(9, e);

  for (const auto& g : graphs) {
    auto p = maxcut_to_ising(g);
    const auto n = g.size();
    const auto W = g.adjacency();
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << n); ++b) {
      auto s = spins_from_bits(b, n);
      double pair = 0, crossing = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          pair += W(i, j) * s[i] * s[j];
          if (s[i] != s[j]) crossing += W(i, j);
        }
      const double cut = cut_value(p, s);
      CHECK(cut == (g.total_weight() - pair) / 2);
      CHECK(cut == crossing);
      // J = -W makes the energy the negated pair sum
      CHECK(ising_energy(p, s) == pair);
      auto flipped = s;
      for (auto& v : flipped) v = static_cast<std::int8_t>(-v);
      CHECK(ising_energy(p, flipped) == ising_energy(p, s));
    }
  }
}

TEST_CASE("brute_force_ising") {
  auto edge = maxcut_to_ising(testing::path_graph(2));
  auto e = brute_force_ising(edge);
  CHECK(e.s[0] == -e.s[1]);
  CHECK(*e.cut == 1.0);
  CHECK(*brute_force_ising(maxcut_to_ising(testing::complete_graph(3))).cut == 2.0);
  CHECK(*brute_force_ising(maxcut_to_ising(testing::complete_graph(4))).cut == 4.0);
  CHECK(*brute_force_ising(maxcut_to_ising(testing::petersen_graph())).cut == 12.0);
  CHECK(brute_force_ising(make_ising(Eigen::MatrixXd::Zero(1, 1))).s == std::vector<std::int8_t>{1});

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 10;
    auto J = testing::random_symmetric(n, rng);
    J.diagonal().setZero();
    auto p = make_ising(J);
    auto b = brute_force_ising(p);
    CHECK(b.s[0] == 1);
    CHECK(b.energy == doctest::Approx(exhaustive_ground_energy(p)).epsilon(1e-12));
    CHECK(b.energy == doctest::Approx(ising_energy(p, b.s)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(brute_force_ising(maxcut_to_ising(testing::path_graph(21))), UnsupportedError);
}

TEST_CASE("parameters and defaults") {
  SbParams p;
  CHECK_NOTHROW(p.validate());
  p.p_final = 0.5;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.dt = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.xi0 = -1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = {};
  p.kerr = 0;
  CHECK_THROWS_AS(p.validate(), ValidationError);

  // for zero-mean +-1 couplings sigma_J = 1
  Eigen::MatrixXd J = Eigen::MatrixXd::Ones(16, 16) - Eigen::MatrixXd::Identity(16, 16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j)
      if ((i + j) % 2) J(i, j) = -1;
  auto sk = make_ising(J);
  CHECK(default_xi0(sk) == doctest::Approx(0.7 * 4 / std::sqrt(240.0)));
  CHECK(default_xi0(make_ising(Eigen::MatrixXd::Zero(4, 4)), 2.0) == doctest::Approx(0.7));

  auto r = sb_evolve(maxcut_to_ising(testing::complete_graph(3)), SbParams{});
  CHECK(r.p_final == 2.0);
  CHECK(r.xi0 == doctest::Approx(default_xi0(maxcut_to_ising(testing::complete_graph(3)))));
}

TEST_CASE("hamiltonian: closed forms") {
  auto one = make_ising(Eigen::MatrixXd::Zero(1, 1));
  OscillatorState st;
  st.x = Eigen::VectorXd::Zero(1);
  st.y = Eigen::VectorXd::Zero(1);
  CHECK(hamiltonian_value(st, one, 1.0, 1.0, 0.5) == 0.0);
  for (double K : {0.5, 1.0, 3.0})
    for (double p : {1.5, 2.0, 4.0}) {
      const double delta = 1.0;
      st.p = p;
      st.x(0) = std::sqrt((p - delta) / K);
      CHECK(hamiltonian_value(st, one, K, delta, 0.5) == doctest::Approx(-(p - delta) * (p - delta) / (4 * K)));
    }
}

TEST_CASE("symplectic Euler: energy error at frozen pump is bounded and first order") {
  std::mt19937_64 rng(11);
  auto J = testing::random_symmetric(4, rng);
  J.diagonal().setZero();
  auto prob = make_ising(J);
  std::normal_distribution<double> g(0.0, 0.5);
  OscillatorState start;
  start.x = Eigen::VectorXd(4);
  start.y = Eigen::VectorXd(4);
  for (int i = 0; i < 4; ++i) start.x(i) = g(rng), start.y(i) = g(rng);
  start.p = 1.5;

  auto drift = [&](double dt, std::size_t steps, double& first_half, double& second_half) {
    OscillatorState st = start;
    const double h0 = hamiltonian_value(st, prob, 1.0, 1.0, 0.3);
    first_half = second_half = 0;
    for (std::size_t t = 0; t < steps; ++t) {
      sb_step(st, prob, 1.0, 1.0, 0.3, dt);
      const double d = std::abs(hamiltonian_value(st, prob, 1.0, 1.0, 0.3) - h0);
      double& slot = t < steps / 2 ? first_half : second_half;
      slot = std::max(slot, d);
    }
    return std::max(first_half, second_half);
  };
  double a1, a2, b1, b2;
  const double coarse = drift(0.02, 100000, a1, a2);
  const double fine = drift(0.01, 100000, b1, b2);
  CHECK(coarse < 0.1);
  CHECK(a2 <= 1.5 * a1);  // no secular growth
  CHECK(b2 <= 1.5 * b1);
  CHECK(coarse / fine == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("sb_evolve: zero start, determinism and recorded samples") {
  auto prob = maxcut_to_ising(testing::petersen_graph());
  SbParams p;
  p.seed = 3;
  p.record_every = 100;
  auto a = sb_evolve(prob, p);
  auto b = sb_evolve(prob, p);
  REQUIRE(a.samples.size() == 21);
  CHECK(a.samples[0].x == Eigen::VectorXd::Zero(10));
  CHECK(a.samples[0].y.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(a.samples[0].y.cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.samples.back().p == doctest::Approx(2.0));
  CHECK(a.samples[10].p == doctest::Approx(1.0));
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    CHECK(a.samples[k].x == b.samples[k].x);
    CHECK(a.samples[k].y == b.samples[k].y);
  }
  CHECK(a.final_spins.s == b.final_spins.s);
  CHECK(a.best.energy <= a.final_spins.energy);
  CHECK(*a.best.cut == doctest::Approx((-a.best.energy + prob.w_total) / 2));

  p.track_best = false;
  auto c = sb_evolve(prob, p);
  CHECK(c.best.s == c.final_spins.s);
}

TEST_CASE("sb_evolve: zero coupling and jitter-free start") {
  auto zero = make_ising(Eigen::MatrixXd::Zero(5, 5));
  auto r = sb_evolve(zero, SbParams{});
  CHECK(r.best.energy == 0.0);
  CHECK(r.final_spins.energy == 0.0);

  SbParams p;
  p.jitter = 0.0;
  auto still = sb_evolve(maxcut_to_ising(testing::complete_graph(4)), p);
  CHECK(still.final_state.x == Eigen::VectorXd::Zero(4));
  CHECK(still.final_spins.s == std::vector<std::int8_t>{1, 1, 1, 1});  // sign(0) = +1
}

TEST_CASE("sb_evolve: instability is reported") {
  SbParams p;
  p.dt = 3.0;
  CHECK_THROWS_AS(sb_evolve(maxcut_to_ising(testing::petersen_graph()), p), NumericalError);
}

TEST_CASE("single edge settles antiparallel") {
  auto prob = maxcut_to_ising(testing::path_graph(2));
  int anti = 0;
  SbParams p;
  p.track_best = false;
  for (std::uint64_t s = 0; s < 100; ++s) {
    p.seed = s;
    auto r = sb_evolve(prob, p);
    anti += r.final_spins.s[0] != r.final_spins.s[1];
  }
  CHECK(anti >= 95);
}

TEST_CASE("single oscillator lands on the bifurcated branch") {
  auto one = make_ising(Eigen::MatrixXd::Zero(1, 1));
  SbParams p;
  p.t_steps = 400000;  // slow ramp: without damping the orbit keeps an oscillation around the branch
  p.track_best = false;
  const double branch = std::sqrt((2.0 - p.detuning) / p.kerr);
  int positive = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    p.seed = s;
    const double x = sb_evolve(one, p).final_state.x(0);
    positive += x > 0;
    CHECK(std::abs(std::abs(x) - branch) <= 0.05 * branch);
  }
  CHECK(positive >= 35);
  CHECK(positive <= 65);
}

TEST_CASE("MAX-CUT benchmark reaches the optimum in at least 80% of runs") {
  for (const auto& g : benchmark_graphs()) {
    auto prob = maxcut_to_ising(g);
    const auto opt = brute_force_ising(prob);
    int hits = 0;
    SbParams p;
    for (std::uint64_t s = 0; s < 50; ++s) {
      p.seed = s;
      hits += sb_evolve(prob, p).best.energy <= opt.energy + 1e-9;
    }
    CAPTURE(g.size());
    CHECK(hits >= 40);
  }
}

TEST_CASE("sb_solve keeps the best restart") {
  auto prob = maxcut_to_ising(testing::gnp(12, 0.5, 103));
  SbParams p;
  auto r = sb_solve(prob, p, 8);
  REQUIRE(r.energies.size() == 8);
  CHECK(r.best.best.energy == *std::min_element(r.energies.begin(), r.energies.end()));
  CHECK(r.energies[r.best_restart] == r.best.best.energy);
  CHECK_THROWS_AS(sb_solve(prob, p, 0), ValidationError);
}
