#include "dynopt/laplacian.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "dynopt/errors.hpp"

namespace dynopt {

namespace {
constexpr std::size_t kDenseLimit = 5000;
}

NormalizedLaplacian laplacian(const WeightedGraph& g) {
  if (g.directed()) throw UnsupportedError("normalized Laplacian is only defined for undirected graphs");
  const auto n = static_cast<Eigen::Index>(g.size());
  NormalizedLaplacian L;
  L.degree = g.degrees();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (L.degree(i) <= 0.0) {
      throw PreconditionError("node " + std::to_string(i) + " is isolated; the normalized Laplacian row is undefined");
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(2 * g.edges().size() + g.size());
  for (Eigen::Index i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
  for (const auto& e : g.edges()) {
    const auto i = static_cast<Eigen::Index>(e.i), j = static_cast<Eigen::Index>(e.j);
    trip.emplace_back(i, j, -e.w / L.degree(i));
    trip.emplace_back(j, i, -e.w / L.degree(j));
  }
  L.matrix.resize(n, n);
  L.matrix.setFromTriplets(trip.begin(), trip.end());
  return L;
}

Eigen::MatrixXd symmetrized(const NormalizedLaplacian& L) {
  const Eigen::VectorXd s = L.degree.cwiseSqrt();
  const Eigen::VectorXd inv = s.cwiseInverse();
  Eigen::MatrixXd m = s.asDiagonal() * L.dense() * inv.asDiagonal();
  return m;
}

void canonicalize_sign(Eigen::VectorXd& v, double tol) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > tol * scale) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

std::vector<EigenPair> dense_spectrum(const NormalizedLaplacian& L) {
  const auto n = L.matrix.rows();
  if (static_cast<std::size_t>(n) > kDenseLimit) {
    throw UnsupportedError("dense spectrum limited to n <= " + std::to_string(kDenseLimit));
  }
  Eigen::MatrixXd S = symmetrized(L);
  // D L = D - W must be symmetric for the similarity transform to give a symmetric matrix
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * std::max(1.0, S.cwiseAbs().maxCoeff())) {
    throw UnsupportedError("Laplacian is not symmetrizable by D^{1/2}");
  }
  S = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");

  const Eigen::VectorXd inv_sqrt = L.degree.cwiseSqrt().cwiseInverse();
  std::vector<EigenPair> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd v = inv_sqrt.asDiagonal() * es.eigenvectors().col(k);
    v.normalize();
    canonicalize_sign(v);
    out.push_back({es.eigenvalues()(k), std::move(v)});
  }
  return out;
}

}  // namespace dynopt
