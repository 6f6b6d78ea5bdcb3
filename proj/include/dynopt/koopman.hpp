#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dynopt {

/// Smooth objective with an analytic gradient; drives gradient-descent trajectories.
struct Objective {
  std::string name;
  std::size_t dim = 0;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

/// (x1^2 + x2 - 11)^2 + (x1 + x2^2 - 7)^2
Objective himmelblau();
/// |x|^2 / 2 in `dim` dimensions
Objective quadratic(std::size_t dim);
/// Double well (x^2 - 1)^2 / 4 per coordinate; descent contracts toward the corners of {-1, 1}^dim.
Objective double_well(std::size_t dim);

/// The four local minima of himmelblau, to about 1e-12.
std::vector<Eigen::Vector2d> himmelblau_minima();

/// Rows of xs are states x_n, rows of ys the iterates a(x_n).
struct SnapshotPairs {
  Eigen::MatrixXd xs;
  Eigen::MatrixXd ys;

  std::size_t size() const noexcept { return static_cast<std::size_t>(xs.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(xs.cols()); }
};

struct GdTrajectory {
  std::vector<Eigen::VectorXd> states;  // x_0 ... x_n
  bool diverged = false;                // stopped early once |x| > 1e6
  SnapshotPairs pairs() const;
};

/// x_{n+1} = x_n - step grad f(x_n).
GdTrajectory gd_trajectory(const Objective& obj, const Eigen::VectorXd& x0, double step, std::size_t n_steps);
/// `iterations` descent steps applied to every row of `points`.
Eigen::MatrixXd gd_apply(const Objective& obj, const Eigen::MatrixXd& points, double step, std::size_t iterations);
/// Pairs (x, a^burst(x)) for each row of `starts`, with a one descent step.
SnapshotPairs gd_pairs(const Objective& obj, const Eigen::MatrixXd& starts, double step, std::size_t burst = 1);

/// Newton-Raphson on the monic complex polynomial with the given roots, as a map on R^2 = C.
Eigen::MatrixXd newton_apply(const std::vector<std::complex<double>>& roots, const Eigen::MatrixXd& points,
                             std::size_t iterations = 1);
SnapshotPairs newton_pairs(const std::vector<std::complex<double>>& roots, const Eigen::MatrixXd& starts,
                           std::size_t burst = 1);

/// Uniform points in [lo, hi]^dim.
Eigen::MatrixXd uniform_points(std::size_t n, std::size_t dim, double lo, double hi, std::uint64_t seed);

/// CSV rows hold x then a(x), d columns each. '#' lines and a non-numeric header row are skipped.
SnapshotPairs read_snapshot_csv(std::istream& in);
SnapshotPairs load_snapshot_csv(const std::filesystem::path& path);

struct DictionarySpec {
  int degree = 4;  // monomials up to this total degree; 1 is constant + coordinates
  std::size_t n_centers = 50;
  double width_factor = 2.0;    // width = factor x median nearest-neighbour center distance
  std::optional<double> width;  // overrides the rule above
  std::uint64_t seed = 0;       // k-means++ seeding

  /// "linear", "polyD", "rbf" or "polyD+rbf"; rbf parts take n_centers from `centers`.
  static DictionarySpec parse(const std::string& text, std::size_t centers = 50);
};

struct Dictionary {
  std::size_t dim = 0;
  std::vector<std::vector<int>> exponents;  // element 0 is the constant, then the coordinates
  Eigen::MatrixXd centers;                  // one Gaussian per row
  double width = 0.0;

  std::size_t size() const noexcept { return exponents.size() + static_cast<std::size_t>(centers.rows()); }
  /// N x size() evaluation matrix.
  Eigen::MatrixXd evaluate(const Eigen::MatrixXd& points) const;
  Eigen::RowVectorXd evaluate_point(const Eigen::VectorXd& x) const;
  /// Coefficients of coordinate i: the unit vector at element 1 + i.
  Eigen::VectorXd coordinate(std::size_t i) const;
  std::vector<std::string> describe() const;
};

/// Centers from seeded k-means++ and Lloyd refinement on `data`.
Dictionary build_dictionary(const DictionarySpec& spec, const Eigen::MatrixXd& data);

/// Centers as the k-means++ / Lloyd solution; rows of the result are the centers.
Eigen::MatrixXd kmeans(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed,
                       std::size_t iterations = 50, std::vector<std::size_t>* labels = nullptr,
                       double* inertia = nullptr);

struct KoopmanApprox {
  Eigen::MatrixXd K;  // acts on coefficient vectors: g o a ~ dict . (K c)
  double residual = 0.0;  // |G K - A|_F^2 / (N_X N_D)
  std::size_t dim = 0;    // state dimension of the dictionary it was fitted with
};

/// K = G^+ A, the least-squares solution of min |G K - A|_F.
KoopmanApprox edmd_fit(const SnapshotPairs& pairs, const Dictionary& dict);
/// Training residual of an arbitrary K on `pairs`.
double edmd_residual(const Eigen::MatrixXd& K, const SnapshotPairs& pairs, const Dictionary& dict);

struct SpectralDecomp {
  Eigen::VectorXcd eigenvalues;   // descending |lambda|
  Eigen::MatrixXcd eigenvectors;  // columns v_k, phi_k = dict . v_k
  Eigen::MatrixXcd modes;         // modes(k, i): coefficient of phi_k in coordinate x_i
  bool defective = false;         // eigenvector matrix numerically singular; modes left empty
  double eig_residual = 0.0;      // max_k |K v_k - lambda_k v_k| / |K|
};

SpectralDecomp spectrum(const KoopmanApprox& approx);
/// N x size() matrix of phi_k at `points`.
Eigen::MatrixXcd eigenfunctions(const SpectralDecomp& sd, const Dictionary& dict, const Eigen::MatrixXd& points);
/// Median over pairs of |phi_k(a(x)) - lambda_k phi_k(x)| / (1 + |phi_k(x)|).
double eigenfunction_residual(const SpectralDecomp& sd, const Dictionary& dict, const SnapshotPairs& pairs,
                              std::size_t k);
/// Index of the eigenpair that best represents the constant function.
std::size_t constant_eigenpair(const SpectralDecomp& sd);

/// g(x0), prediction of g(x_1), ..., g(x_horizon) by powers of K. Needs horizon >= 1.
std::vector<double> predict(const KoopmanApprox& approx, const Dictionary& dict, const Eigen::VectorXd& coeffs,
                            const Eigen::VectorXd& x0, std::size_t horizon);
/// (horizon + 1) x d predicted states.
Eigen::MatrixXd predict_state(const KoopmanApprox& approx, const Dictionary& dict, const Eigen::VectorXd& x0,
                              std::size_t horizon);

struct BasinLabels {
  std::vector<std::size_t> labels;
  Eigen::MatrixXd centers;             // in standardized feature space
  std::vector<std::size_t> eigenpairs;  // indices into the spectrum used as features
  std::size_t n_groups = 0;
};

/// Features are the real and imaginary parts of the n_basin_fns eigenfunctions with |lambda| closest
/// to 1, constant excluded, standardized and clustered by k-means. With n_groups unset the count is
/// the smallest k in 2..5 whose inertia is under 10% of the one-group inertia and at least 2.5x
/// below that of k - 1, else 1.
BasinLabels basin_label(const SpectralDecomp& sd, const Dictionary& dict, const Eigen::MatrixXd& points,
                        std::size_t n_basin_fns = 3, std::optional<std::size_t> n_groups = std::nullopt,
                        std::uint64_t seed = 0);

/// Largest |phi_k| on circles of the given radii around `center` (64 samples each), per radius.
std::vector<double> eigenfunction_growth(const SpectralDecomp& sd, const Dictionary& dict, std::size_t k,
                                         const Eigen::Vector2d& center, const std::vector<double>& radii);

}  // namespace dynopt
