#include "dynopt/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "dynopt/errors.hpp"

namespace dynopt {

Objective himmelblau() {
  Objective o;
  o.name = "himmelblau";
  o.dim = 2;
  o.value = [](const Eigen::VectorXd& x) {
    const double a = x(0) * x(0) + x(1) - 11.0, b = x(0) + x(1) * x(1) - 7.0;
    return a * a + b * b;
  };
  o.gradient = [](const Eigen::VectorXd& x) {
    const double a = x(0) * x(0) + x(1) - 11.0, b = x(0) + x(1) * x(1) - 7.0;
    Eigen::VectorXd g(2);
    g << 4.0 * x(0) * a + 2.0 * b, 2.0 * a + 4.0 * x(1) * b;
    return g;
  };
  return o;
}

Objective quadratic(std::size_t dim) {
  if (dim == 0) throw ValidationError("quadratic objective needs dim >= 1");
  Objective o;
  o.name = "quadratic";
  o.dim = dim;
  o.value = [](const Eigen::VectorXd& x) { return 0.5 * x.squaredNorm(); };
  o.gradient = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x); };
  return o;
}

Objective double_well(std::size_t dim) {
  if (dim == 0) throw ValidationError("double-well objective needs dim >= 1");
  Objective o;
  o.name = "double_well";
  o.dim = dim;
  o.value = [](const Eigen::VectorXd& x) { return 0.25 * (x.array().square() - 1.0).square().sum(); };
  o.gradient = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(x.array().cube() - x.array()); };
  return o;
}

std::vector<Eigen::Vector2d> himmelblau_minima() {
  std::vector<Eigen::Vector2d> m{{3.0, 2.0}, {-2.805118, 3.131312}, {-3.779310, -3.283186}, {3.584428, -1.848126}};
  // Newton polish on the gradient
  for (auto& x : m) {
    for (int it = 0; it < 20; ++it) {
      const double a = x(0) * x(0) + x(1) - 11.0, b = x(0) + x(1) * x(1) - 7.0;
      Eigen::Vector2d g(4.0 * x(0) * a + 2.0 * b, 2.0 * a + 4.0 * x(1) * b);
      Eigen::Matrix2d H;
      H << 12.0 * x(0) * x(0) + 4.0 * x(1) - 42.0, 4.0 * (x(0) + x(1)), 4.0 * (x(0) + x(1)),
          4.0 * x(0) + 12.0 * x(1) * x(1) - 26.0;
      x -= H.inverse() * g;
    }
  }
  return m;
}

SnapshotPairs GdTrajectory::pairs() const {
  SnapshotPairs p;
  if (states.size() < 2) return p;
  const auto n = static_cast<Eigen::Index>(states.size() - 1);
  const auto d = states.front().size();
  p.xs.resize(n, d);
  p.ys.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.xs.row(i) = states[static_cast<std::size_t>(i)].transpose();
    p.ys.row(i) = states[static_cast<std::size_t>(i) + 1].transpose();
  }
  return p;
}

namespace {

void require_objective_point(const Objective& obj, Eigen::Index d) {
  if (static_cast<std::size_t>(d) != obj.dim) throw ValidationError("point dimension does not match the objective");
}

}  // namespace

GdTrajectory gd_trajectory(const Objective& obj, const Eigen::VectorXd& x0, double step, std::size_t n_steps) {
  if (!(step > 0.0)) throw ValidationError("step must be positive");
  require_objective_point(obj, x0.size());
  GdTrajectory tr;
  tr.states.reserve(n_steps + 1);
  tr.states.push_back(x0);
  Eigen::VectorXd x = x0;
  for (std::size_t n = 0; n < n_steps; ++n) {
    x -= step * obj.gradient(x);
    tr.states.push_back(x);
    if (!x.allFinite() || x.norm() > 1e6) {
      tr.diverged = true;
      break;
    }
  }
  return tr;
}

Eigen::MatrixXd gd_apply(const Objective& obj, const Eigen::MatrixXd& points, double step, std::size_t iterations) {
  if (!(step > 0.0)) throw ValidationError("step must be positive");
  require_objective_point(obj, points.cols());
  Eigen::MatrixXd out = points;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    Eigen::VectorXd x = out.row(i).transpose();
    for (std::size_t k = 0; k < iterations; ++k) x -= step * obj.gradient(x);
    out.row(i) = x.transpose();
  }
  return out;
}

SnapshotPairs gd_pairs(const Objective& obj, const Eigen::MatrixXd& starts, double step, std::size_t burst) {
  if (burst == 0) throw ValidationError("burst must be at least 1");
  return {starts, gd_apply(obj, starts, step, burst)};
}

Eigen::MatrixXd newton_apply(const std::vector<std::complex<double>>& roots, const Eigen::MatrixXd& points,
                             std::size_t iterations) {
  if (roots.empty()) throw ValidationError("Newton map needs at least one root");
  if (points.cols() != 2) throw ValidationError("Newton map acts on points of R^2");
  Eigen::MatrixXd out = points;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    std::complex<double> z(out(i, 0), out(i, 1));
    for (std::size_t k = 0; k < iterations; ++k) {
      // p'/p = sum 1 / (z - r)
      std::complex<double> s = 0.0;
      bool at_root = false;
      for (const auto& r : roots) {
        if (z == r) at_root = true;
        else s += 1.0 / (z - r);
      }
      if (at_root || s == 0.0) break;
      z -= 1.0 / s;
    }
    out(i, 0) = z.real();
    out(i, 1) = z.imag();
  }
  return out;
}

SnapshotPairs newton_pairs(const std::vector<std::complex<double>>& roots, const Eigen::MatrixXd& starts,
                           std::size_t burst) {
  if (burst == 0) throw ValidationError("burst must be at least 1");
  return {starts, newton_apply(roots, starts, burst)};
}

Eigen::MatrixXd uniform_points(std::size_t n, std::size_t dim, double lo, double hi, std::uint64_t seed) {
  if (!(hi > lo)) throw ValidationError("uniform_points needs hi > lo");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = u(rng);
  return p;
}

SnapshotPairs read_snapshot_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string buf;
  std::size_t line = 0, width = 0;
  bool seen_content = false;
  while (std::getline(in, buf)) {
    ++line;
    const auto first = buf.find_first_not_of(" \t\r");
    if (first == std::string::npos || buf[first] == '#') continue;
    std::vector<double> row;
    std::stringstream ls(buf);
    std::string cell;
    bool numeric = true;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (!seen_content) {  // header
        seen_content = true;
        continue;
      }
      throw ParseError("non-numeric CSV cell", line);
    }
    seen_content = true;
    if (row.empty() || row.size() % 2 != 0) throw ParseError("CSV rows need 2d columns (x then a(x))", line);
    if (width == 0) width = row.size();
    if (row.size() != width) throw ParseError("inconsistent CSV column count", line);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("CSV holds no snapshot pairs");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(width / 2);
  SnapshotPairs p{Eigen::MatrixXd(n, d), Eigen::MatrixXd(n, d)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      p.xs(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      p.ys(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j + d)];
    }
  }
  return p;
}

SnapshotPairs load_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file '" + path.string() + "'");
  return read_snapshot_csv(in);
}

DictionarySpec DictionarySpec::parse(const std::string& text, std::size_t centers) {
  DictionarySpec s;
  s.degree = 1;
  s.n_centers = 0;
  if (text == "default") {
    s.degree = 4;
    s.n_centers = centers;
    return s;
  }
  std::stringstream ss(text);
  std::string part;
  bool any = false;
  while (std::getline(ss, part, '+')) {
    any = true;
    if (part == "linear") {
      s.degree = std::max(s.degree, 1);
    } else if (part == "rbf") {
      s.n_centers = centers;
    } else if (part.rfind("poly", 0) == 0 && part.size() > 4 &&
               part.find_first_not_of("0123456789", 4) == std::string::npos) {
      s.degree = std::stoi(part.substr(4));
      if (s.degree < 1 || s.degree > 12) throw ValidationError("polynomial degree must be in 1..12");
    } else {
      throw ValidationError("unknown dictionary part '" + part + "' (linear, polyD, rbf)");
    }
  }
  if (!any) throw ValidationError("empty dictionary spec");
  return s;
}

namespace {

// exponent vectors of total degree `deg` in lexicographically descending order
void compositions(std::size_t dim, int deg, std::vector<int>& cur, std::size_t pos, std::vector<std::vector<int>>& out) {
  if (pos + 1 == dim) {
    cur[pos] = deg;
    out.push_back(cur);
    return;
  }
  for (int e = deg; e >= 0; --e) {
    cur[pos] = e;
    compositions(dim, deg - e, cur, pos + 1, out);
  }
}

}  // namespace

Eigen::MatrixXd Dictionary::evaluate(const Eigen::MatrixXd& points) const {
  if (static_cast<std::size_t>(points.cols()) != dim) throw ValidationError("points have the wrong dimension");
  const auto n = points.rows();
  int max_deg = 0;
  for (const auto& e : exponents)
    for (int v : e) max_deg = std::max(max_deg, v);
  // pw[j](i, p) = x_ij^p
  std::vector<Eigen::MatrixXd> pw(dim, Eigen::MatrixXd::Ones(n, max_deg + 1));
  for (std::size_t j = 0; j < dim; ++j)
    for (int p = 1; p <= max_deg; ++p) pw[j].col(p) = pw[j].col(p - 1).cwiseProduct(points.col(static_cast<Eigen::Index>(j)));

  Eigen::MatrixXd M(n, static_cast<Eigen::Index>(size()));
  for (std::size_t c = 0; c < exponents.size(); ++c) {
    Eigen::VectorXd col = Eigen::VectorXd::Ones(n);
    for (std::size_t j = 0; j < dim; ++j)
      if (exponents[c][j]) col = col.cwiseProduct(pw[j].col(exponents[c][j]));
    M.col(static_cast<Eigen::Index>(c)) = col;
  }
  const double inv = 1.0 / (2.0 * width * width);
  for (Eigen::Index r = 0; r < centers.rows(); ++r) {
    const auto c = static_cast<Eigen::Index>(exponents.size()) + r;
    M.col(c) = (-(points.rowwise() - centers.row(r)).rowwise().squaredNorm() * inv).array().exp().matrix();
  }
  return M;
}

Eigen::RowVectorXd Dictionary::evaluate_point(const Eigen::VectorXd& x) const {
  return evaluate(x.transpose()).row(0);
}

Eigen::VectorXd Dictionary::coordinate(std::size_t i) const {
  if (i >= dim) throw ValidationError("coordinate index out of range");
  return Eigen::VectorXd::Unit(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(1 + i));
}

std::vector<std::string> Dictionary::describe() const {
  std::vector<std::string> out;
  for (const auto& e : exponents) {
    std::string s;
    for (std::size_t j = 0; j < dim; ++j) {
      if (!e[j]) continue;
      if (!s.empty()) s += "*";
      s += "x" + std::to_string(j + 1);
      if (e[j] > 1) s += "^" + std::to_string(e[j]);
    }
    out.push_back(s.empty() ? "1" : s);
  }
  for (Eigen::Index r = 0; r < centers.rows(); ++r) out.push_back("rbf" + std::to_string(r));
  return out;
}

Eigen::MatrixXd kmeans(const Eigen::MatrixXd& data, std::size_t k, std::uint64_t seed, std::size_t iterations,
                       std::vector<std::size_t>* labels, double* inertia) {
  const auto n = data.rows();
  if (k == 0) throw ValidationError("k-means needs k >= 1");
  if (static_cast<std::size_t>(n) < k) throw ValidationError("fewer data points than requested centers");
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd C(static_cast<Eigen::Index>(k), data.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  C.row(0) = data.row(pick(rng));
  Eigen::VectorXd d2 = (data.rowwise() - C.row(0)).rowwise().squaredNorm();
  for (Eigen::Index c = 1; c < C.rows(); ++c) {
    Eigen::Index next;
    if (d2.sum() > 0.0) {
      std::discrete_distribution<Eigen::Index> dd(d2.data(), d2.data() + n);
      next = dd(rng);
    } else {
      next = pick(rng);
    }
    C.row(c) = data.row(next);
    d2 = d2.cwiseMin((data.rowwise() - C.row(c)).rowwise().squaredNorm());
  }

  std::vector<std::size_t> lab(static_cast<std::size_t>(n), 0);
  auto assign = [&] {
    double total = 0.0;
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      const double d = (C.rowwise() - data.row(i)).rowwise().squaredNorm().minCoeff(&best);
      total += d;
      if (lab[static_cast<std::size_t>(i)] != static_cast<std::size_t>(best)) changed = true;
      lab[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    return std::pair{total, changed};
  };
  auto [total, changed] = assign();
  for (std::size_t it = 0; it < iterations; ++it) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(C.rows(), C.cols());
    std::vector<std::size_t> count(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(static_cast<Eigen::Index>(lab[static_cast<std::size_t>(i)])) += data.row(i);
      ++count[lab[static_cast<std::size_t>(i)]];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (count[c]) C.row(static_cast<Eigen::Index>(c)) = sum.row(static_cast<Eigen::Index>(c)) / static_cast<double>(count[c]);
    std::tie(total, changed) = assign();
    if (!changed) break;
  }
  if (labels) *labels = std::move(lab);
  if (inertia) *inertia = total;
  return C;
}

Dictionary build_dictionary(const DictionarySpec& spec, const Eigen::MatrixXd& data) {
  if (spec.degree < 1) throw ValidationError("dictionary degree must be at least 1");
  if (data.cols() == 0) throw ValidationError("dictionary data has no coordinates");
  Dictionary dict;
  dict.dim = static_cast<std::size_t>(data.cols());
  std::vector<int> cur(dict.dim, 0);
  for (int deg = 0; deg <= spec.degree; ++deg) compositions(dict.dim, deg, cur, 0, dict.exponents);

  if (spec.n_centers == 0) return dict;
  if (static_cast<std::size_t>(data.rows()) < spec.n_centers) {
    throw ValidationError("fewer data points (" + std::to_string(data.rows()) + ") than requested centers (" +
                          std::to_string(spec.n_centers) + ")");
  }
  dict.centers = kmeans(data, spec.n_centers, spec.seed, 20);
  if (spec.width) {
    dict.width = *spec.width;
  } else if (spec.n_centers > 1) {
    std::vector<double> nn;
    for (Eigen::Index i = 0; i < dict.centers.rows(); ++i) {
      double best = INFINITY;
      for (Eigen::Index j = 0; j < dict.centers.rows(); ++j)
        if (i != j) best = std::min(best, (dict.centers.row(i) - dict.centers.row(j)).norm());
      nn.push_back(best);
    }
    std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2), nn.end());
    dict.width = spec.width_factor * nn[nn.size() / 2];
  } else {
    // one center: RMS distance of the data to it
    dict.width = spec.width_factor * std::sqrt((data.rowwise() - dict.centers.row(0)).rowwise().squaredNorm().mean());
  }
  if (!(dict.width > 0.0)) throw ValidationError("radial width must be positive (coincident centers?)");
  return dict;
}

double edmd_residual(const Eigen::MatrixXd& K, const SnapshotPairs& pairs, const Dictionary& dict) {
  const Eigen::MatrixXd G = dict.evaluate(pairs.xs), A = dict.evaluate(pairs.ys);
  return (G * K - A).squaredNorm() / static_cast<double>(G.rows() * G.cols());
}

KoopmanApprox edmd_fit(const SnapshotPairs& pairs, const Dictionary& dict) {
  if (pairs.size() == 0) throw ValidationError("EDMD needs at least one snapshot pair");
  if (pairs.ys.rows() != pairs.xs.rows() || pairs.ys.cols() != pairs.xs.cols())
    throw ValidationError("xs and ys must have the same shape");
  const Eigen::MatrixXd G = dict.evaluate(pairs.xs), A = dict.evaluate(pairs.ys);
  // column equilibration keeps the pseudo-inverse threshold meaningful across x^4 and Gaussian columns
  Eigen::VectorXd scale = G.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (scale(j) == 0.0) scale(j) = 1.0;
  const Eigen::MatrixXd Gs = G * scale.cwiseInverse().asDiagonal();
  KoopmanApprox out;
  out.dim = dict.dim;
  out.K = scale.cwiseInverse().asDiagonal() * Gs.completeOrthogonalDecomposition().solve(A);
  out.residual = (G * out.K - A).squaredNorm() / static_cast<double>(G.rows() * G.cols());
  return out;
}

SpectralDecomp spectrum(const KoopmanApprox& approx) {
  const auto& K = approx.K;
  if (K.rows() == 0 || K.rows() != K.cols()) throw ValidationError("K must be a nonempty square matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw NumericalError("eigen decomposition of K failed");
  const Eigen::VectorXcd lam = es.eigenvalues();
  const Eigen::MatrixXcd V = es.eigenvectors();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(lam.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(lam(a)) != std::abs(lam(b))) return std::abs(lam(a)) > std::abs(lam(b));
    return lam(a).imag() > lam(b).imag();
  });
  SpectralDecomp sd;
  sd.eigenvalues.resize(lam.size());
  sd.eigenvectors.resize(V.rows(), V.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sd.eigenvalues(static_cast<Eigen::Index>(k)) = lam(order[k]);
    sd.eigenvectors.col(static_cast<Eigen::Index>(k)) = V.col(order[k]);
  }
  const Eigen::MatrixXcd Kc = K.cast<std::complex<double>>();
  const double knorm = std::max(K.norm(), 1e-300);
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k) {
    const auto& v = sd.eigenvectors.col(k);
    sd.eig_residual = std::max(sd.eig_residual, (Kc * v - sd.eigenvalues(k) * v).norm() / knorm);
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sd.eigenvectors);
  const auto& sv = svd.singularValues();
  sd.defective = sv(sv.size() - 1) < 1e-12 * sv(0);
  if (!sd.defective && approx.dim > 0) {
    // x_i = sum_k modes(k, i) phi_k since e_{1+i} = V (V^-1 e_{1+i})
    sd.modes = sd.eigenvectors.partialPivLu().inverse().middleCols(1, static_cast<Eigen::Index>(approx.dim));
  }
  return sd;
}

Eigen::MatrixXcd eigenfunctions(const SpectralDecomp& sd, const Dictionary& dict, const Eigen::MatrixXd& points) {
  if (static_cast<std::size_t>(sd.eigenvectors.rows()) != dict.size())
    throw ValidationError("spectrum and dictionary sizes differ");
  return dict.evaluate(points).cast<std::complex<double>>() * sd.eigenvectors;
}

double eigenfunction_residual(const SpectralDecomp& sd, const Dictionary& dict, const SnapshotPairs& pairs,
                              std::size_t k) {
  if (k >= static_cast<std::size_t>(sd.eigenvalues.size())) throw ValidationError("eigenpair index out of range");
  if (pairs.size() == 0) throw ValidationError("residual needs at least one pair");
  const auto kk = static_cast<Eigen::Index>(k);
  const Eigen::VectorXcd v = sd.eigenvectors.col(kk);
  const Eigen::VectorXcd px = dict.evaluate(pairs.xs).cast<std::complex<double>>() * v;
  const Eigen::VectorXcd py = dict.evaluate(pairs.ys).cast<std::complex<double>>() * v;
  std::vector<double> r(pairs.size());
  for (Eigen::Index i = 0; i < px.size(); ++i)
    r[static_cast<std::size_t>(i)] = std::abs(py(i) - sd.eigenvalues(kk) * px(i)) / (1.0 + std::abs(px(i)));
  std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2), r.end());
  return r[r.size() / 2];
}

std::size_t constant_eigenpair(const SpectralDecomp& sd) {
  Eigen::Index best = 0;
  double score = -1.0;
  for (Eigen::Index k = 0; k < sd.eigenvectors.cols(); ++k) {
    const double s = std::abs(sd.eigenvectors(0, k)) / sd.eigenvectors.col(k).norm();
    if (s > score) score = s, best = k;
  }
  return static_cast<std::size_t>(best);
}

std::vector<double> predict(const KoopmanApprox& approx, const Dictionary& dict, const Eigen::VectorXd& coeffs,
                            const Eigen::VectorXd& x0, std::size_t horizon) {
  if (horizon == 0) throw ValidationError("horizon must be at least 1");
  if (static_cast<std::size_t>(coeffs.size()) != dict.size()) throw ValidationError("coefficient vector has the wrong size");
  if (approx.K.rows() != coeffs.size()) throw ValidationError("K and dictionary sizes differ");
  const Eigen::RowVectorXd d0 = dict.evaluate_point(x0);
  std::vector<double> out;
  out.reserve(horizon + 1);
  Eigen::VectorXd c = coeffs;
  out.push_back(d0.dot(c));
  for (std::size_t t = 1; t <= horizon; ++t) {
    c = approx.K * c;
    out.push_back(d0.dot(c));
  }
  return out;
}

Eigen::MatrixXd predict_state(const KoopmanApprox& approx, const Dictionary& dict, const Eigen::VectorXd& x0,
                              std::size_t horizon) {
  if (horizon == 0) throw ValidationError("horizon must be at least 1");
  if (static_cast<std::size_t>(approx.K.rows()) != dict.size()) throw ValidationError("K and dictionary sizes differ");
  const auto d = static_cast<Eigen::Index>(dict.dim);
  const Eigen::RowVectorXd d0 = dict.evaluate_point(x0);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(approx.K.rows(), d);
  for (Eigen::Index i = 0; i < d; ++i) C(1 + i, i) = 1.0;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(horizon + 1), d);
  out.row(0) = x0.transpose();
  for (std::size_t t = 1; t <= horizon; ++t) {
    C = approx.K * C;
    out.row(static_cast<Eigen::Index>(t)) = d0 * C;
  }
  return out;
}

BasinLabels basin_label(const SpectralDecomp& sd, const Dictionary& dict, const Eigen::MatrixXd& points,
                        std::size_t n_basin_fns, std::optional<std::size_t> n_groups, std::uint64_t seed) {
  constexpr std::size_t kMaxGroups = 5;
  if (n_basin_fns == 0) throw ValidationError("need at least one basin function");
  if (static_cast<std::size_t>(sd.eigenvalues.size()) < n_basin_fns + 1)
    throw PreconditionError("spectrum has fewer than " + std::to_string(n_basin_fns) + " non-constant eigenpairs");
  if (n_groups && (*n_groups < 1 || *n_groups > kMaxGroups)) throw ValidationError("n_groups must be in 1..5");
  if (points.rows() == 0) throw ValidationError("no points to label");

  const std::size_t skip = constant_eigenpair(sd);
  std::vector<std::size_t> idx;
  for (Eigen::Index k = 0; k < sd.eigenvalues.size(); ++k)
    if (static_cast<std::size_t>(k) != skip) idx.push_back(static_cast<std::size_t>(k));
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(std::abs(sd.eigenvalues(static_cast<Eigen::Index>(a))) - 1.0) <
           std::abs(std::abs(sd.eigenvalues(static_cast<Eigen::Index>(b))) - 1.0);
  });
  idx.resize(n_basin_fns);

  BasinLabels out;
  out.eigenpairs = idx;
  const Eigen::MatrixXcd phi = eigenfunctions(sd, dict, points);
  std::vector<Eigen::VectorXd> cols;
  for (std::size_t k : idx) {
    const auto c = phi.col(static_cast<Eigen::Index>(k));
    cols.push_back(c.real());
    if (sd.eigenvalues(static_cast<Eigen::Index>(k)).imag() != 0.0) cols.push_back(c.imag());
  }
  std::vector<Eigen::VectorXd> kept;
  for (auto& c : cols) {
    const double mean = c.mean();
    const double sd_c = std::sqrt((c.array() - mean).square().mean());
    if (sd_c > 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff())) kept.push_back((c.array() - mean) / sd_c);
  }
  const auto n = points.rows();
  if (kept.empty()) {
    out.labels.assign(static_cast<std::size_t>(n), 0);
    out.centers = Eigen::MatrixXd::Zero(1, 0);
    out.n_groups = 1;
    return out;
  }
  Eigen::MatrixXd F(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) F.col(static_cast<Eigen::Index>(j)) = kept[j];

  // best of several seeded restarts per group count
  auto cluster = [&](std::size_t k, std::vector<std::size_t>& lab, Eigen::MatrixXd& C) {
    double best = INFINITY;
    for (std::uint64_t r = 0; r < 5; ++r) {
      std::vector<std::size_t> l;
      double in = 0.0;
      auto c = kmeans(F, k, seed + 7919 * k + r, 100, &l, &in);
      if (in < best) best = in, lab = std::move(l), C = std::move(c);
    }
    return best;
  };

  std::size_t k = n_groups.value_or(0);
  const std::size_t limit = std::min<std::size_t>(kMaxGroups, static_cast<std::size_t>(n));
  if (!n_groups) {
    std::vector<double> inertia(limit + 1, 0.0);
    std::vector<std::size_t> lab;
    Eigen::MatrixXd C;
    for (std::size_t j = 1; j <= limit; ++j) inertia[j] = cluster(j, lab, C);
    k = 1;
    for (std::size_t j = 2; j <= limit; ++j) {
      if (inertia[j] < 0.1 * inertia[1] && inertia[j] * 2.5 <= inertia[j - 1]) {
        k = j;
        break;
      }
    }
  }
  if (k > static_cast<std::size_t>(n)) throw ValidationError("more groups than points");
  cluster(k, out.labels, out.centers);
  out.n_groups = k;
  return out;
}

std::vector<double> eigenfunction_growth(const SpectralDecomp& sd, const Dictionary& dict, std::size_t k,
                                         const Eigen::Vector2d& center, const std::vector<double>& radii) {
  if (dict.dim != 2) throw ValidationError("eigenfunction growth probes need a 2-d dictionary");
  if (k >= static_cast<std::size_t>(sd.eigenvalues.size())) throw ValidationError("eigenpair index out of range");
  std::vector<double> out;
  constexpr int kSamples = 64;
  for (double r : radii) {
    Eigen::MatrixXd pts(kSamples, 2);
    for (int i = 0; i < kSamples; ++i) {
      const double th = 2.0 * M_PI * i / kSamples;
      pts.row(i) << center(0) + r * std::cos(th), center(1) + r * std::sin(th);
    }
    const Eigen::VectorXcd phi = dict.evaluate(pts).cast<std::complex<double>>() * sd.eigenvectors.col(static_cast<Eigen::Index>(k));
    out.push_back(phi.cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace dynopt
