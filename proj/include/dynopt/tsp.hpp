#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dynopt {

struct DistanceMatrix {
  Eigen::MatrixXd d;
  bool symmetric = true;
  std::string name;
  /// Present when the instance came from coordinates.
  std::vector<std::pair<double, double>> coords;

  std::size_t size() const noexcept { return static_cast<std::size_t>(d.rows()); }
};

/// Validates zero diagonal, nonnegative finite entries and (when flagged) symmetry.
DistanceMatrix make_distance_matrix(Eigen::MatrixXd d, std::string name = {});
/// Euclidean distances; `tsplib_round` applies the EUC_2D nint rule.
DistanceMatrix euclidean_instance(const std::vector<std::pair<double, double>>& pts, bool tsplib_round = false);

/// TSPLIB subset: EUC_2D coordinates or EXPLICIT FULL_MATRIX weights.
DistanceMatrix read_tsplib(std::istream& in);
DistanceMatrix load_tsplib(const std::filesystem::path& path);

struct CycleAdjacency {
  bool directed = false;
  Eigen::MatrixXd t;
};

/// T_undir (rows sum to 2) or T_dir (rows sum to 1) for the cycle on n >= 3 nodes.
CycleAdjacency cycle_adjacency(std::size_t n, bool directed = false);

struct Tour {
  std::vector<std::size_t> order;
  double cost = 0.0;
};

double tour_cost(const DistanceMatrix& D, const std::vector<std::size_t>& order);
Tour make_tour(const DistanceMatrix& D, std::vector<std::size_t> order);

/// Permutation matrix with P(k, order[k]) = 1: row = tour position, column = city.
Eigen::MatrixXd permutation_matrix(const std::vector<std::size_t>& order);

/// tr(A^T P^T B P)
double trace_cost(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& P);

struct OrthogonalMatrix {
  Eigen::MatrixXd p;
  double orthogonality_defect = 0.0;  // ||P^T P - I||_F
};

double orthogonality_defect(const Eigen::MatrixXd& p);

/// Sign-fixed QR: the Q factor with R's diagonal made positive.
Eigen::MatrixXd reorthonormalize(const Eigen::MatrixXd& p);

enum class SignStrategy { Identity, Random, Greedy };

struct ProcrustesSolution {
  OrthogonalMatrix P;
  Eigen::VectorXd signs;
  double residual = 0.0;  // ||A - P^T B P||_F
  std::vector<std::string> warnings;
};

/// P* = V_B S V_A^T with eigenvalues in descending order. `signs` must hold +-1 entries.
ProcrustesSolution procrustes_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& signs);
/// Random draws S from `seed`; Greedy flips one sign at a time while the optimal assignment
/// weight of P* (its closeness to a permutation matrix) improves.
ProcrustesSolution procrustes_solve(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    SignStrategy strategy = SignStrategy::Identity, std::uint64_t seed = 0);

struct FlowState {
  OrthogonalMatrix P;
  double lambda = 0.0;
  double time = 0.0;
  double constraint_residual = 0.0;  // (1/3) tr(P^T (P - P o P))
};

struct FlowDerivative {
  Eigen::MatrixXd dP;
  double dlambda;
};

/// Right-hand side of the constrained flow with {X, Y} = XY - YX.
FlowDerivative flow_rhs(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& P, double lambda);

struct FlowOptions {
  double dt = 1e-3;
  std::size_t steps = 1000;
  std::size_t reorth_every = 10;
  std::size_t record_every = 1;  // 0 keeps only the first and last states
  bool constrained = true;       // false freezes lambda at its start value
};

/// RK4 integration. Re-orthonormalizes every `reorth_every` steps and whenever the defect
/// exceeds 1e-6; throws NumericalError if a single step pushes the defect above 1e-3.
std::vector<FlowState> gradient_flow(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const FlowState& start,
                                     const FlowOptions& opt);

/// Flow input for a distance matrix: off-diagonal entries shifted by their mean, then scaled so
/// max |A_ij| = scale. On permutations the trace cost changes by a constant, so tours rank identically.
Eigen::MatrixXd flow_cost_matrix(const DistanceMatrix& D, double scale = 10.0);

/// Optimal linear assignment maximizing sum_k P(k, sigma(k)); sigma(k) is the city at position k.
Tour nearest_permutation(const Eigen::MatrixXd& P, const DistanceMatrix& D);
std::vector<std::size_t> nearest_permutation(const Eigen::MatrixXd& P);

/// (1 - beta) * rownorm(exp(-d_ij / mean_i)) + beta * rownorm(|P^T B P|), diagonal zeroed.
Eigen::MatrixXd p_nearness_scores(const DistanceMatrix& D, const Eigen::MatrixXd& Pstar, const CycleAdjacency& B,
                                  double beta);

struct CandidateSets {
  /// Per city, min(kappa, n-1) neighbours by descending score (lowest index on ties).
  std::vector<std::vector<std::pair<std::size_t, double>>> lists;
  /// Union-symmetrized neighbour lists: j in eligible[i] iff j in lists[i] or i in lists[j].
  std::vector<std::vector<std::size_t>> eligible;

  bool contains(std::size_t i, std::size_t j) const;
};

CandidateSets candidate_sets(const Eigen::MatrixXd& scores, std::size_t kappa);

/// Candidate pipeline: Procrustes on flow_cost_matrix(D) against T_undir, then P-nearness
/// scores with weight `beta` and the top `kappa` per city.
CandidateSets pnearness_candidates(const DistanceMatrix& D, double beta, std::size_t kappa = 5);

/// Fraction of the tour's edges that are candidate (union) edges.
double candidate_coverage(const CandidateSets& c, const std::vector<std::size_t>& order);

struct TwoOptResult {
  Tour tour;
  std::size_t moves = 0;
  std::vector<double> cost_history;  // cost after each accepted move, starting with the input cost
};

/// First-improvement 2-opt restricted to moves adding at least one candidate edge.
TwoOptResult two_opt(const DistanceMatrix& D, const Tour& start, const CandidateSets& cands,
                     std::size_t max_moves = SIZE_MAX);

/// Exact optimum by enumeration with city 0 fixed first; refuses n > 12.
Tour brute_force_tsp(const DistanceMatrix& D);

}  // namespace dynopt
