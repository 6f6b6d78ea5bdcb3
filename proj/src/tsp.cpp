#include "dynopt/tsp.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "dynopt/assignment.hpp"
#include "dynopt/errors.hpp"
#include "dynopt/laplacian.hpp"

namespace dynopt {

namespace {

bool is_symmetric(const Eigen::MatrixXd& m, double rel = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel * scale;
}

void require_symmetric(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw ValidationError(std::string(what) + " must be square");
  if (!is_symmetric(m)) {
    throw UnsupportedError(std::string(what) + " is not symmetric; this operation needs symmetric matrices");
  }
}

void require_permutation(const std::vector<std::size_t>& order, std::size_t n) {
  if (order.size() != n) throw ValidationError("tour has " + std::to_string(order.size()) + " cities, expected " +
                                               std::to_string(n));
  std::vector<char> seen(n, 0);
  for (auto c : order) {
    if (c >= n || seen[c]) throw ValidationError("tour order is not a permutation");
    seen[c] = 1;
  }
}

}  // namespace

DistanceMatrix make_distance_matrix(Eigen::MatrixXd d, std::string name) {
  if (d.rows() != d.cols()) throw ValidationError("distance matrix must be square");
  if (d.rows() < 1) throw ValidationError("distance matrix is empty");
  if (!d.allFinite()) throw ValidationError("distance matrix has non-finite entries");
  if ((d.array() < 0.0).any()) throw ValidationError("distance matrix has negative entries");
  if (d.diagonal().cwiseAbs().maxCoeff() != 0.0) throw ValidationError("distance matrix diagonal must be zero");
  DistanceMatrix D;
  D.symmetric = is_symmetric(d, 0.0);
  D.d = std::move(d);
  D.name = std::move(name);
  return D;
}

DistanceMatrix euclidean_instance(const std::vector<std::pair<double, double>>& pts, bool tsplib_round) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double v = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
      if (tsplib_round) v = std::floor(v + 0.5);
      d(i, j) = d(j, i) = v;
    }
  }
  auto D = make_distance_matrix(std::move(d));
  D.coords = pts;
  return D;
}

namespace {

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c); };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
  return s;
}

double to_number(const std::string& tok, std::size_t line) {
  double v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError("expected a number, got '" + tok + "'", line);
  }
  return v;
}

}  // namespace

DistanceMatrix read_tsplib(std::istream& in) {
  std::string name, type, weight_type, weight_format;
  long long dim = -1;
  std::vector<std::pair<double, double>> coords;
  std::vector<double> weights;
  std::string buf;
  std::size_t line = 0;
  enum class Section { Header, Coords, Weights, Done } section = Section::Header;

  while (std::getline(in, buf)) {
    ++line;
    std::string s = trim(buf);
    if (s.empty()) continue;
    if (s == "EOF") break;
    if (section == Section::Coords || section == Section::Weights) {
      // a keyword ends a data section
      if (std::isalpha(static_cast<unsigned char>(s[0]))) {
        section = Section::Header;
      } else {
        std::istringstream ls(s);
        std::string tok;
        std::vector<double> vals;
        while (ls >> tok) vals.push_back(to_number(tok, line));
        if (section == Section::Coords) {
          if (vals.size() != 3) throw ParseError("expected 'id x y'", line);
          if (static_cast<long long>(coords.size()) >= dim) throw ParseError("more coordinates than DIMENSION", line);
          if (vals[0] != static_cast<double>(coords.size() + 1)) throw ParseError("node ids must be 1..n in order", line);
          coords.emplace_back(vals[1], vals[2]);
        } else {
          weights.insert(weights.end(), vals.begin(), vals.end());
        }
        continue;
      }
    }
    if (s == "NODE_COORD_SECTION") {
      if (dim < 0) throw ParseError("NODE_COORD_SECTION before DIMENSION", line);
      section = Section::Coords;
      continue;
    }
    if (s == "EDGE_WEIGHT_SECTION") {
      if (dim < 0) throw ParseError("EDGE_WEIGHT_SECTION before DIMENSION", line);
      section = Section::Weights;
      continue;
    }
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ParseError("expected 'KEY : VALUE'", line);
    const std::string key = trim(s.substr(0, colon));
    const std::string value = trim(s.substr(colon + 1));
    if (key == "NAME") {
      name = value;
    } else if (key == "TYPE") {
      type = value;
      if (type != "TSP" && type != "ATSP") throw UnsupportedError("TSPLIB TYPE '" + type + "' not supported");
    } else if (key == "DIMENSION") {
      dim = static_cast<long long>(to_number(value, line));
      if (dim < 3) throw ParseError("DIMENSION must be at least 3", line);
    } else if (key == "EDGE_WEIGHT_TYPE") {
      weight_type = value;
      if (weight_type != "EUC_2D" && weight_type != "EXPLICIT") {
        throw UnsupportedError("EDGE_WEIGHT_TYPE '" + weight_type + "' not supported");
      }
    } else if (key == "EDGE_WEIGHT_FORMAT") {
      weight_format = value;
      if (weight_format != "FULL_MATRIX") {
        throw UnsupportedError("EDGE_WEIGHT_FORMAT '" + weight_format + "' not supported");
      }
    } else if (key == "COMMENT" || key == "DISPLAY_DATA_TYPE" || key == "NODE_COORD_TYPE") {
      // informational
    } else {
      throw UnsupportedError("TSPLIB keyword '" + key + "' not supported");
    }
  }

  if (dim < 0) throw ParseError("missing DIMENSION");
  const auto n = static_cast<std::size_t>(dim);
  DistanceMatrix D;
  if (weight_type == "EUC_2D") {
    if (coords.size() != n) throw ParseError("expected " + std::to_string(n) + " coordinates");
    D = euclidean_instance(coords, true);
  } else if (weight_type == "EXPLICIT") {
    if (weight_format.empty()) throw ParseError("EXPLICIT weights need EDGE_WEIGHT_FORMAT");
    if (weights.size() != n * n) throw ParseError("expected " + std::to_string(n * n) + " matrix entries");
    Eigen::MatrixXd d(dim, dim);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d(i, j) = weights[i * n + j];
    D = make_distance_matrix(std::move(d));
  } else {
    throw ParseError("missing EDGE_WEIGHT_TYPE");
  }
  if (type == "TSP" && !D.symmetric) throw ValidationError("TYPE TSP but the weight matrix is asymmetric");
  D.name = name;
  return D;
}

DistanceMatrix load_tsplib(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open TSPLIB file '" + path.string() + "'");
  return read_tsplib(in);
}

CycleAdjacency cycle_adjacency(std::size_t n, bool directed) {
  if (n < 3) throw ValidationError("cycle adjacency needs n >= 3");
  const auto m = static_cast<Eigen::Index>(n);
  CycleAdjacency c;
  c.directed = directed;
  c.t = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    c.t(i, (i + 1) % m) = 1.0;
    if (!directed) c.t((i + 1) % m, i) = 1.0;
  }
  return c;
}

double tour_cost(const DistanceMatrix& D, const std::vector<std::size_t>& order) {
  const auto n = D.size();
  require_permutation(order, n);
  double c = 0.0;
  for (std::size_t k = 0; k < n; ++k) c += D.d(order[k], order[(k + 1) % n]);
  return c;
}

Tour make_tour(const DistanceMatrix& D, std::vector<std::size_t> order) {
  Tour t;
  t.cost = tour_cost(D, order);
  t.order = std::move(order);
  return t;
}

Eigen::MatrixXd permutation_matrix(const std::vector<std::size_t>& order) {
  require_permutation(order, order.size());
  const auto n = static_cast<Eigen::Index>(order.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) p(k, static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)])) = 1.0;
  return p;
}

double trace_cost(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& P) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || P.rows() != P.cols() || A.rows() != B.rows() ||
      A.rows() != P.rows()) {
    throw ValidationError("trace_cost: dimension mismatch");
  }
  // tr(A^T M) = sum_ij A_ij M_ij
  return A.cwiseProduct(P.transpose() * B * P).sum();
}

double orthogonality_defect(const Eigen::MatrixXd& p) {
  return (p.transpose() * p - Eigen::MatrixXd::Identity(p.cols(), p.cols())).norm();
}

Eigen::MatrixXd reorthonormalize(const Eigen::MatrixXd& p) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(p);
  Eigen::MatrixXd q = qr.householderQ();
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

namespace {

struct DescendingEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  bool repeated = false;
};

DescendingEigen descending_eigen(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  const auto n = m.rows();
  DescendingEigen out;
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd v = out.vectors.col(k);
    canonicalize_sign(v);
    out.vectors.col(k) = v;
    if (k > 0 && out.values(k - 1) - out.values(k) < 1e-10) out.repeated = true;
  }
  return out;
}

double assignment_weight(const Eigen::MatrixXd& p) {
  const auto sigma = max_weight_assignment(p);
  double s = 0.0;
  for (Eigen::Index k = 0; k < p.rows(); ++k) s += p(k, static_cast<Eigen::Index>(sigma[static_cast<std::size_t>(k)]));
  return s;
}

}  // namespace

ProcrustesSolution procrustes_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& signs) {
  require_symmetric(A, "A");
  require_symmetric(B, "B");
  if (A.rows() != B.rows()) throw ValidationError("procrustes: A and B differ in size");
  if (signs.size() != A.rows()) throw ValidationError("procrustes: sign vector has the wrong length");
  for (Eigen::Index i = 0; i < signs.size(); ++i)
    if (signs(i) != 1.0 && signs(i) != -1.0) throw ValidationError("procrustes: signs must be +1 or -1");

  const auto ea = descending_eigen(A);
  const auto eb = descending_eigen(B);
  ProcrustesSolution sol;
  if (ea.repeated) sol.warnings.push_back("A has eigenvalues closer than 1e-10; V_A is defined only up to rotation");
  if (eb.repeated) sol.warnings.push_back("B has eigenvalues closer than 1e-10; V_B is defined only up to rotation");
  sol.signs = signs;
  sol.P.p = eb.vectors * signs.asDiagonal() * ea.vectors.transpose();
  sol.P.orthogonality_defect = orthogonality_defect(sol.P.p);
  sol.residual = (A - sol.P.p.transpose() * B * sol.P.p).norm();
  return sol;
}

ProcrustesSolution procrustes_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, SignStrategy strategy,
                                    std::uint64_t seed) {
  const auto n = A.rows();
  Eigen::VectorXd s = Eigen::VectorXd::Ones(n);
  switch (strategy) {
    case SignStrategy::Identity:
      return procrustes_solve(A, B, s);
    case SignStrategy::Random: {
      std::mt19937_64 rng(seed);
      std::bernoulli_distribution coin(0.5);
      for (Eigen::Index i = 0; i < n; ++i) s(i) = coin(rng) ? -1.0 : 1.0;
      return procrustes_solve(A, B, s);
    }
    case SignStrategy::Greedy: {
      auto sol = procrustes_solve(A, B, s);
      // P* = V_B S V_A^T, so flipping s_i flips the rank-one term v_B,i v_A,i^T
      const auto ea = descending_eigen(A);
      const auto eb = descending_eigen(B);
      Eigen::MatrixXd p = sol.P.p;
      double best = assignment_weight(p);
      for (bool improved = true; improved;) {
        improved = false;
        for (Eigen::Index i = 0; i < n; ++i) {
          Eigen::MatrixXd trial = p - 2.0 * s(i) * eb.vectors.col(i) * ea.vectors.col(i).transpose();
          const double w = assignment_weight(trial);
          if (w > best + 1e-12) {
            best = w;
            p = std::move(trial);
            s(i) = -s(i);
            improved = true;
          }
        }
      }
      return procrustes_solve(A, B, s);
    }
  }
  throw ValidationError("unknown sign strategy");
}

FlowDerivative flow_rhs(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& P, double lambda) {
  const Eigen::MatrixXd M = P.transpose() * B * P;
  const Eigen::MatrixXd Mt = P.transpose() * B.transpose() * P;
  const Eigen::MatrixXd bracket = (M * A - A * M) + (Mt * A.transpose() - A.transpose() * Mt);
  const Eigen::MatrixXd PP = P.cwiseProduct(P);
  const Eigen::MatrixXd X = PP.transpose() * P - P.transpose() * PP;
  FlowDerivative d;
  d.dP = -P * bracket - lambda * (P * X);
  d.dlambda = (P.transpose() * (P - PP)).trace() / 3.0;
  return d;
}

std::vector<FlowState> gradient_flow(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const FlowState& start,
                                     const FlowOptions& opt) {
  require_symmetric(A, "A");
  require_symmetric(B, "B");
  if (A.rows() != B.rows() || start.P.p.rows() != A.rows() || start.P.p.cols() != A.rows()) {
    throw ValidationError("gradient_flow: dimension mismatch");
  }
  if (!(opt.dt > 0.0)) throw ValidationError("gradient_flow: dt must be positive");
  if (orthogonality_defect(start.P.p) > 1e-6) throw ValidationError("gradient_flow: start matrix is not orthogonal");

  Eigen::MatrixXd P = start.P.p;
  double lam = start.lambda;
  double time = start.time;
  auto snapshot = [&] {
    FlowState s;
    s.P.p = P;
    s.P.orthogonality_defect = orthogonality_defect(P);
    s.lambda = lam;
    s.time = time;
    s.constraint_residual = (P.transpose() * (P - P.cwiseProduct(P))).trace() / 3.0;
    return s;
  };
  auto rhs = [&](const Eigen::MatrixXd& p, double l) {
    auto d = flow_rhs(A, B, p, l);
    if (!opt.constrained) d.dlambda = 0.0;
    return d;
  };

  std::vector<FlowState> traj;
  traj.push_back(snapshot());
  const double h = opt.dt;
  for (std::size_t step = 1; step <= opt.steps; ++step) {
    const auto k1 = rhs(P, lam);
    const auto k2 = rhs(P + 0.5 * h * k1.dP, lam + 0.5 * h * k1.dlambda);
    const auto k3 = rhs(P + 0.5 * h * k2.dP, lam + 0.5 * h * k2.dlambda);
    const auto k4 = rhs(P + h * k3.dP, lam + h * k3.dlambda);
    P += (h / 6.0) * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    lam += (h / 6.0) * (k1.dlambda + 2.0 * k2.dlambda + 2.0 * k3.dlambda + k4.dlambda);
    time += h;
    if (!P.allFinite()) throw NumericalError("gradient flow diverged; reduce dt");
    const double defect = orthogonality_defect(P);
    if (defect > 1e-3) {
      throw NumericalError("orthogonality defect " + std::to_string(defect) + " after one step; reduce dt");
    }
    if ((opt.reorth_every > 0 && step % opt.reorth_every == 0) || defect > 1e-6) P = reorthonormalize(P);
    const bool last = step == opt.steps;
    if (last || (opt.record_every > 0 && step % opt.record_every == 0)) traj.push_back(snapshot());
  }
  return traj;
}

Eigen::MatrixXd flow_cost_matrix(const DistanceMatrix& D, double scale) {
  if (!D.symmetric) throw UnsupportedError("the gradient flow needs a symmetric distance matrix");
  if (!(scale > 0.0)) throw ValidationError("flow scale must be positive");
  const auto n = static_cast<double>(D.size());
  const double mean = D.size() > 1 ? D.d.sum() / (n * (n - 1.0)) : 0.0;
  Eigen::MatrixXd A = D.d.array() - mean;
  A.diagonal().setZero();
  const double top = A.cwiseAbs().maxCoeff();
  if (top > 0.0) A *= scale / top;
  return A;
}

std::vector<std::size_t> nearest_permutation(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols()) throw ValidationError("nearest_permutation: matrix must be square");
  return max_weight_assignment(P);
}

Tour nearest_permutation(const Eigen::MatrixXd& P, const DistanceMatrix& D) {
  if (static_cast<std::size_t>(P.rows()) != D.size()) throw ValidationError("nearest_permutation: size mismatch");
  return make_tour(D, nearest_permutation(P));
}

namespace {

void row_normalize(Eigen::MatrixXd& m) {
  const auto n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 0.0;
    const double s = m.row(i).sum();
    if (s > 0.0) {
      m.row(i) /= s;
    } else if (n > 1) {
      m.row(i).setConstant(1.0 / static_cast<double>(n - 1));
      m(i, i) = 0.0;
    }
  }
}

}  // namespace

Eigen::MatrixXd p_nearness_scores(const DistanceMatrix& D, const Eigen::MatrixXd& Pstar, const CycleAdjacency& B,
                                  double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]");
  const auto n = static_cast<Eigen::Index>(D.size());
  if (Pstar.rows() != n || Pstar.cols() != n || B.t.rows() != n) throw ValidationError("p_nearness: size mismatch");

  Eigen::MatrixXd dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mean = n > 1 ? D.d.row(i).sum() / static_cast<double>(n - 1) : 1.0;
    if (!(mean > 0.0)) mean = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = std::exp(-D.d(i, j) / mean);
  }
  row_normalize(dist);

  Eigen::MatrixXd q = (Pstar.transpose() * B.t * Pstar).cwiseAbs();
  row_normalize(q);

  Eigen::MatrixXd score = (1.0 - beta) * dist + beta * q;
  score.diagonal().setZero();
  return score;
}

bool CandidateSets::contains(std::size_t i, std::size_t j) const {
  const auto& e = eligible.at(i);
  return std::binary_search(e.begin(), e.end(), j);
}

CandidateSets candidate_sets(const Eigen::MatrixXd& scores, std::size_t kappa) {
  if (kappa < 2) throw ValidationError("kappa must be at least 2");
  if (scores.rows() != scores.cols()) throw ValidationError("score matrix must be square");
  const auto n = static_cast<std::size_t>(scores.rows());
  const std::size_t m = std::min(kappa, n - 1);
  CandidateSets c;
  c.lists.resize(n);
  c.eligible.resize(n);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i) {
    idx.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) idx.push_back(j);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores(i, a) > scores(i, b); });
    for (std::size_t r = 0; r < m; ++r) {
      c.lists[i].emplace_back(idx[r], scores(i, idx[r]));
      c.eligible[i].push_back(idx[r]);
      c.eligible[idx[r]].push_back(i);
    }
  }
  for (auto& e : c.eligible) {
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
  }
  return c;
}

CandidateSets pnearness_candidates(const DistanceMatrix& D, double beta, std::size_t kappa) {
  const auto B = cycle_adjacency(D.size());
  const auto sol = procrustes_solve(flow_cost_matrix(D), B.t);
  return candidate_sets(p_nearness_scores(D, sol.P.p, B, beta), kappa);
}

double candidate_coverage(const CandidateSets& c, const std::vector<std::size_t>& order) {
  const auto n = order.size();
  if (c.eligible.size() != n) throw ValidationError("candidate_coverage: size mismatch");
  std::size_t hit = 0;
  for (std::size_t k = 0; k < n; ++k) hit += c.contains(order[k], order[(k + 1) % n]);
  return n ? static_cast<double>(hit) / static_cast<double>(n) : 1.0;
}

TwoOptResult two_opt(const DistanceMatrix& D, const Tour& start, const CandidateSets& cands, std::size_t max_moves) {
  if (!D.symmetric) throw UnsupportedError("two_opt needs a symmetric distance matrix");
  const std::size_t n = D.size();
  require_permutation(start.order, n);
  if (cands.eligible.size() != n) throw ValidationError("two_opt: candidate sets have the wrong size");

  std::vector<std::size_t> order = start.order, pos(n);
  for (std::size_t k = 0; k < n; ++k) pos[order[k]] = k;
  const auto& d = D.d;
  double cost = tour_cost(D, order);

  TwoOptResult res;
  res.cost_history.push_back(cost);
  // reverse positions lo..hi, turning tour edges (lo-1, lo) and (hi, hi+1) into (lo-1, hi) and (lo, hi+1)
  auto reverse = [&](std::size_t lo, std::size_t hi) {
    while (lo < hi) {
      std::swap(order[lo], order[hi]);
      pos[order[lo]] = lo;
      pos[order[hi]] = hi;
      ++lo;
      --hi;
    }
  };

  if (n >= 4) {
    bool improved = true;
    while (improved && res.moves < max_moves) {
      improved = false;
      for (std::size_t i = 0; i < n && res.moves < max_moves; ++i) {
        for (int dir = 0; dir < 2; ++dir) {
          const std::size_t a = order[i];
          // edge e1 starts at position ea: (order[ea], order[ea+1])
          const std::size_t ea = dir == 0 ? i : (i + n - 1) % n;
          const std::size_t b = dir == 0 ? order[(i + 1) % n] : order[ea];
          bool moved = false;
          for (std::size_t c : cands.eligible[a]) {
            if (c == b) continue;
            const std::size_t j = pos[c];
            const std::size_t ec = dir == 0 ? j : (j + n - 1) % n;
            const std::size_t e = dir == 0 ? order[(j + 1) % n] : order[ec];
            if (e == a) continue;
            const double gain = d(a, b) + d(c, e) - d(a, c) - d(b, e);
            if (gain > 1e-10) {
              const std::size_t lo = std::min(ea, ec), hi = std::max(ea, ec);
              reverse(lo + 1, hi);
              cost -= gain;
              ++res.moves;
              res.cost_history.push_back(cost);
              moved = improved = true;
              break;
            }
          }
          if (moved || res.moves >= max_moves) break;
        }
      }
    }
  }
  res.tour = make_tour(D, std::move(order));
  return res;
}

Tour brute_force_tsp(const DistanceMatrix& D) {
  const std::size_t n = D.size();
  if (n > 12) throw UnsupportedError("brute_force_tsp refuses n > 12");
  if (n <= 3) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    return make_tour(D, std::move(order));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_cost = INFINITY;
  const auto& d = D.d;
  do {
    // a symmetric tour and its reversal cost the same; keep one orientation
    if (D.symmetric && perm[1] > perm[n - 1]) continue;
    double c = d(perm[n - 1], perm[0]);
    for (std::size_t k = 0; k + 1 < n && c < best_cost; ++k) c += d(perm[k], perm[k + 1]);
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin() + 1, perm.end()));
  return make_tour(D, std::move(best));
}

}  // namespace dynopt
