#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "dynopt/graph.hpp"

namespace dynopt {

/// Random-walk normalized Laplacian L = I - D^{-1} W of an undirected graph.
/// Stored sparse; `degree` keeps the row sums of W so L can be symmetrized.
struct NormalizedLaplacian {
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Eigen::VectorXd degree;

  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix); }
};

/// Throws PreconditionError for isolated nodes, UnsupportedError for directed graphs.
NormalizedLaplacian laplacian(const WeightedGraph& g);

/// D^{1/2} L D^{-1/2} = I - D^{-1/2} W D^{-1/2}.
Eigen::MatrixXd symmetrized(const NormalizedLaplacian& L);

struct EigenPair {
  double value;
  Eigen::VectorXd vector;  // right eigenvector of L, unit 2-norm
};

/// Full spectrum of L in ascending order, computed on the symmetrized operator and mapped back.
/// Each eigenvector is normalized to unit 2-norm with its first nonzero component positive.
std::vector<EigenPair> dense_spectrum(const NormalizedLaplacian& L);

/// Flip `v` so that its first component with magnitude above `tol * max|v|` is positive.
void canonicalize_sign(Eigen::VectorXd& v, double tol = 1e-10);

}  // namespace dynopt
