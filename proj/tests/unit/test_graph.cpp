#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "dynopt/assignment.hpp"
#include "dynopt/errors.hpp"
#include "dynopt/graph.hpp"
#include "dynopt/laplacian.hpp"
#include "support/generators.hpp"

using namespace dynopt;

namespace {

WeightedGraph parse(const std::string& text, GraphFormat f) {
  std::istringstream in(text);
  return read_graph(in, f);
}

WeightedGraph random_weighted_graph(std::size_t n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.1, 3.0);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, w(rng)});  // keep every node attached
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j)
      if (coin(rng)) e.push_back({i, j, w(rng)});
  return WeightedGraph(n, e);
}

}  // namespace

TEST_CASE("edge list: single edge") {
  auto g = parse("0 1 1.0\n", GraphFormat::EdgeList);
  CHECK(g.size() == 2);
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].w == 1.0);
}

TEST_CASE("edge list: comments, default weight and 1-based ids") {
  auto g = parse("# header\n1 2\n2 3 2.5  # trailing\n\n", GraphFormat::EdgeList);
  CHECK(g.size() == 3);
  auto w = g.adjacency();
  CHECK(w(0, 1) == 1.0);
  CHECK(w(1, 2) == 2.5);
  CHECK(w(2, 1) == 2.5);
}

TEST_CASE("edge list: errors") {
  SUBCASE("malformed line reports its line number") {
    try {
      parse("0 1\n0 x 1\n", GraphFormat::EdgeList);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  CHECK_THROWS_AS(parse("0 1 -1\n", GraphFormat::EdgeList), ValidationError);
  CHECK_THROWS_AS(parse("0 1\n1 0\n", GraphFormat::EdgeList), ValidationError);
  CHECK_THROWS_AS(parse("0 0\n", GraphFormat::EdgeList), ValidationError);
  CHECK_THROWS_AS(parse("0 1 2 3\n", GraphFormat::EdgeList), ParseError);
}

TEST_CASE("rudy: triangle") {
  auto g = parse("3 3\n1 2 1\n2 3 1\n1 3 1\n", GraphFormat::Rudy);
  CHECK(g.size() == 3);
  CHECK(g.edges().size() == 3);
  CHECK(g.adjacency().isApprox(testing::complete_graph(3).adjacency()));
  CHECK_THROWS_AS(parse("3 3\n1 2 1\n", GraphFormat::Rudy), ParseError);
  CHECK_THROWS_AS(parse("3 1\n1 4 1\n", GraphFormat::Rudy), ParseError);
}

TEST_CASE("matrix market: path P5 fixture matches hand-written adjacency") {
  auto g = load_graph(DYNOPT_FIXTURE_DIR "/p5.mtx", GraphFormat::MatrixMarket);
  Eigen::MatrixXd expected(5, 5);
  expected << 0, 1, 0, 0, 0,
              1, 0, 1, 0, 0,
              0, 1, 0, 1, 0,
              0, 0, 1, 0, 1,
              0, 0, 0, 1, 0;
  CHECK(g.adjacency() == expected);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1\n", GraphFormat::MatrixMarket),
                  UnsupportedError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 2 1\n", GraphFormat::MatrixMarket),
                  ParseError);
}

TEST_CASE("load_graph: missing file") {
  CHECK_THROWS_AS(load_graph("/nonexistent/graph.el", GraphFormat::EdgeList), IoError);
  CHECK(parse_graph_format("rudy") == GraphFormat::Rudy);
  CHECK_THROWS_AS(parse_graph_format("dot"), ValidationError);
}

TEST_CASE("laplacian: closed forms") {
  SUBCASE("P2") {
    Eigen::Matrix2d expected;
    expected << 1, -1, -1, 1;
    CHECK(laplacian(testing::path_graph(2)).dense() == Eigen::MatrixXd(expected));
  }
  SUBCASE("K3") {
    auto L = laplacian(testing::complete_graph(3)).dense();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(L(i, j) == doctest::Approx(i == j ? 1.0 : -0.5));
  }
  SUBCASE("weighted star") {
    auto L = laplacian(WeightedGraph(4, {{0, 1, 1}, {0, 2, 2}, {0, 3, 3}})).dense();
    CHECK(L(0, 1) == doctest::Approx(-1.0 / 6));
    CHECK(L(0, 2) == doctest::Approx(-2.0 / 6));
    CHECK(L(0, 3) == doctest::Approx(-3.0 / 6));
    CHECK(L(1, 0) == doctest::Approx(-1.0));
  }
  CHECK_THROWS_AS(laplacian(WeightedGraph(3, {{0, 1, 1.0}})), PreconditionError);
  CHECK_THROWS_AS(laplacian(WeightedGraph(2, {{0, 1, 1.0}}, true)), UnsupportedError);
}

TEST_CASE("dense spectrum: closed forms") {
  SUBCASE("P2") {
    auto s = dense_spectrum(laplacian(testing::path_graph(2)));
    CHECK(s[0].value == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s[1].value == doctest::Approx(2.0));
  }
  SUBCASE("two disjoint triangles: zero has multiplicity two") {
    WeightedGraph g(6, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}});
    auto s = dense_spectrum(laplacian(g));
    CHECK(std::abs(s[0].value) < 1e-10);
    CHECK(std::abs(s[1].value) < 1e-10);
    CHECK(s[2].value > 1.0);
  }
  SUBCASE("C4 matches 1 - cos(2 pi k / 4)") {
    auto s = dense_spectrum(laplacian(testing::cycle_graph(4)));
    std::vector<double> expected;
    for (int k = 0; k < 4; ++k) expected.push_back(1.0 - std::cos(2.0 * std::numbers::pi * k / 4.0));
    std::sort(expected.begin(), expected.end());
    for (int k = 0; k < 4; ++k) CHECK(s[k].value == doctest::Approx(expected[k]).epsilon(1e-12));
  }
}

TEST_CASE("property: Laplacian and spectrum invariants on random weighted graphs") {
  std::mt19937_64 rng(20240611);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    auto g = random_weighted_graph(n, 0.2, rng);
    auto L = laplacian(g);
    const auto dense = L.dense();
    CAPTURE(trial);

    CHECK((dense * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() <= 1e-12);
    for (Eigen::Index i = 0; i < dense.rows(); ++i) CHECK(dense(i, i) == 1.0);

    auto spec = dense_spectrum(L);
    CHECK(std::abs(spec[0].value) <= 1e-10);
    Eigen::MatrixXd recon = Eigen::MatrixXd::Zero(n, n);
    const Eigen::VectorXd sq = L.degree.cwiseSqrt();
    for (std::size_t k = 0; k < spec.size(); ++k) {
      const auto& p = spec[k];
      CHECK(p.value >= -1e-12);
      CHECK(p.value <= 2.0 + 1e-12);
      if (k > 0) CHECK(p.value >= spec[k - 1].value);
      CHECK(p.vector.norm() == doctest::Approx(1.0));
      CHECK((dense * p.vector - p.value * p.vector).cwiseAbs().maxCoeff() <= 1e-8 * static_cast<double>(n));
      Eigen::VectorXd y = sq.asDiagonal() * p.vector;
      y.normalize();
      recon += p.value * y * y.transpose();
    }
    CHECK((recon - symmetrized(L)).norm() <= 1e-8);
  }
}

TEST_CASE("property: multiplicity of zero equals component count") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t parts = 1 + rng() % 4;
    std::vector<Edge> e;
    std::size_t offset = 0;
    for (std::size_t c = 0; c < parts; ++c) {
      const std::size_t m = 2 + rng() % 6;
      auto block = random_weighted_graph(m, 0.4, rng);
      for (auto ed : block.edges()) e.push_back({ed.i + offset, ed.j + offset, ed.w});
      offset += m;
    }
    WeightedGraph g(offset, e);
    REQUIRE(connected_components(g) == parts);
    auto spec = dense_spectrum(laplacian(g));
    std::size_t zeros = 0;
    for (const auto& p : spec) zeros += std::abs(p.value) < 1e-9;
    CHECK(zeros == parts);
  }
}

TEST_CASE("assignment: exhaustive oracle on small matrices") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w(i, j) = u(rng);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = -INFINITY;
    do {
      double s = 0;
      for (int i = 0; i < n; ++i) s += w(i, perm[i]);
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    auto sigma = max_weight_assignment(w);
    double got = 0;
    for (int i = 0; i < n; ++i) got += w(i, sigma[i]);
    CHECK(got == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("assignment: ties resolve toward the identity") {
  CHECK(max_weight_assignment(Eigen::MatrixXd::Ones(4, 4)) == std::vector<std::size_t>{0, 1, 2, 3});
  Eigen::MatrixXd w(3, 3);
  w << 1, 1, 0,
       1, 1, 0,
       0, 0, 1;
  CHECK(max_weight_assignment(w) == std::vector<std::size_t>{0, 1, 2});
}
