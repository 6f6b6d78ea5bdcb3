#include "dynopt/assignment.hpp"

#include <cmath>
#include <limits>

#include "dynopt/errors.hpp"

namespace dynopt {

std::vector<std::size_t> max_weight_assignment(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols()) throw ValidationError("assignment matrix must be square");
  const auto n = static_cast<std::size_t>(w.rows());
  if (n == 0) return {};
  if (!w.allFinite()) throw ValidationError("assignment weights must be finite");

  // Shortest augmenting path Hungarian method on cost = -w, 1-based potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  auto cost = [&](std::size_t i, std::size_t j) {
    return -w(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1));
  };
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> sigma(n);
  for (std::size_t j = 1; j <= n; ++j) sigma[p[j] - 1] = j - 1;

  // Canonicalize ties: swap column choices of rows r1 < r2 whenever that keeps the
  // total and puts the lower column on the lower row.
  const double tol = 1e-12 * std::max(1.0, w.cwiseAbs().maxCoeff());
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r1 = 0; r1 < n; ++r1) {
      for (std::size_t r2 = r1 + 1; r2 < n; ++r2) {
        const auto a = static_cast<Eigen::Index>(r1), b = static_cast<Eigen::Index>(r2);
        const auto ca = static_cast<Eigen::Index>(sigma[r1]), cb = static_cast<Eigen::Index>(sigma[r2]);
        if (ca < cb) continue;
        const double now = w(a, ca) + w(b, cb);
        const double swapped = w(a, cb) + w(b, ca);
        if (swapped >= now - tol) {
          std::swap(sigma[r1], sigma[r2]);
          changed = true;
        }
      }
    }
  }
  return sigma;
}

}  // namespace dynopt
