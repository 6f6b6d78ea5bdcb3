#include "dynopt/wave_cluster.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <queue>
#include <random>
#include <string>

#include <unsupported/Eigen/FFT>

#include "dynopt/assignment.hpp"
#include "dynopt/errors.hpp"

namespace dynopt {

void WaveParams::validate() const {
  if (!(c > 0.0) || !(c < std::numbers::sqrt2)) {
    throw ValidationError("wave speed c must satisfy 0 < c < sqrt(2), got " + std::to_string(c));
  }
  if (k < 1 || k > 31) throw ValidationError("k must be in 1..31");
  if (t_max < 4 * k) throw ValidationError("t_max must be at least 4k");
  if (!(peak_rel_threshold > 0.0) || !(peak_rel_threshold < 1.0)) {
    throw ValidationError("peak_rel_threshold must be in (0, 1)");
  }
}

WaveState WaveState::start(const Eigen::VectorXd& u0, std::size_t capacity) {
  WaveState s;
  s.u_prev = u0;
  s.u_curr = u0;
  s.history.resize(u0.size(), static_cast<Eigen::Index>(capacity));
  return s;
}

WaveState wave_step(WaveState state, const NormalizedLaplacian& L, double c) {
  const auto n = L.matrix.rows();
  if (state.u_prev.size() != n || state.u_curr.size() != n) {
    throw ValidationError("wave state has length " + std::to_string(state.u_curr.size()) + ", Laplacian has " +
                          std::to_string(n));
  }
  Eigen::VectorXd next = 2.0 * state.u_curr - state.u_prev - (c * c) * (L.matrix * state.u_curr);
  state.u_prev = std::move(state.u_curr);
  state.u_curr = std::move(next);
  if (state.recording()) {
    if (static_cast<Eigen::Index>(state.length) >= state.history.cols()) {
      // grow geometrically; callers normally preallocate
      Eigen::MatrixXd grown(n, std::max<Eigen::Index>(1, 2 * state.history.cols()));
      grown.leftCols(state.history.cols()) = state.history;
      state.history = std::move(grown);
    }
    state.history.col(static_cast<Eigen::Index>(state.length)) = state.u_curr;
    ++state.length;
  }
  return state;
}

std::size_t t_max_bound(double tau, double c, std::size_t n, double c_freq, double c_lin) {
  if (!(tau > 0.0)) throw ValidationError("mixing time must be positive");
  if (!(c > 0.0) || !(c < std::numbers::sqrt2)) throw ValidationError("wave speed c must satisfy 0 < c < sqrt(2)");
  if (c_freq < 0.0 || c_lin < 0.0) throw ValidationError("bound constants must be nonnegative");
  const double arg = (2.0 + c * c * (std::exp(-1.0 / tau) - 1.0)) / 2.0;
  if (arg < -1.0 || arg > 1.0) throw NumericalError("arccos argument outside [-1, 1]");
  const double omega = std::acos(arg);
  if (!(omega > 0.0)) throw NumericalError("mixing time too large for double precision");
  return static_cast<std::size_t>(std::ceil(c_freq / omega)) +
         static_cast<std::size_t>(std::ceil(c_lin * static_cast<double>(n)));
}

std::vector<std::uint32_t> assemble_labels(const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>& bits) {
  std::vector<std::uint32_t> labels(static_cast<std::size_t>(bits.rows()), 0);
  for (Eigen::Index i = 0; i < bits.rows(); ++i) {
    for (Eigen::Index j = 0; j < bits.cols(); ++j) {
      if (bits(i, j)) labels[static_cast<std::size_t>(i)] |= std::uint32_t{1} << j;
    }
  }
  return labels;
}

namespace {

bool laplacian_connected(const NormalizedLaplacian& L) {
  const auto n = L.matrix.rows();
  if (n == 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<Eigen::Index> q;
  q.push(0);
  seen[0] = 1;
  Eigen::Index count = 1;
  while (!q.empty()) {
    auto i = q.front();
    q.pop();
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(L.matrix, i); it; ++it) {
      auto j = it.col();
      if (j != i && it.value() != 0.0 && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = 1;
        ++count;
        q.push(j);
      }
    }
  }
  return count == n;
}

// 4-term Blackman-Harris. Its sidelobes (-92 dB) sit far below the relative peak threshold;
// Hann's first sidelobe (-31 dB) would clear it and fake a peak next to every strong mode.
Eigen::VectorXd analysis_window(std::size_t T) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(T));
  const double denom = static_cast<double>(T - 1);
  for (std::size_t n = 0; n < T; ++n) {
    const double x = 2.0 * std::numbers::pi * static_cast<double>(n) / denom;
    w(static_cast<Eigen::Index>(n)) =
        0.35875 - 0.48829 * std::cos(x) + 0.14128 * std::cos(2.0 * x) - 0.01168 * std::cos(3.0 * x);
  }
  return w;
}

constexpr Eigen::Index kFirstBin = 4;  // main-lobe half width of the window

struct Peak {
  double omega;
  double height;
};

std::vector<Peak> find_peaks(const Eigen::VectorXd& mag, std::size_t T, double rel) {
  std::vector<Peak> peaks;
  const auto half = static_cast<Eigen::Index>(T / 2);
  if (half < kFirstBin + 2) return peaks;
  // the lowest bins carry leakage from the (removed) constant mode
  const double top = mag.segment(kFirstBin, half - kFirstBin - 1).maxCoeff();
  if (!(top > 0.0)) return peaks;
  for (Eigen::Index b = kFirstBin; b + 1 < half; ++b) {
    if (mag(b) > mag(b - 1) && mag(b) > mag(b + 1) && mag(b) > rel * top) {
      // parabolic refinement on log magnitude
      const double a = std::log(mag(b - 1)), m = std::log(mag(b)), z = std::log(mag(b + 1));
      const double den = a - 2.0 * m + z;
      double delta = den != 0.0 ? 0.5 * (a - z) / den : 0.0;
      delta = std::clamp(delta, -0.5, 0.5);
      const double omega = 2.0 * std::numbers::pi * (static_cast<double>(b) + delta) / static_cast<double>(T);
      peaks.push_back({omega, mag(b)});
    }
  }
  return peaks;
}

struct Attempt {
  std::vector<Peak> peaks;
  Eigen::MatrixXd history;  // n x T
  Eigen::VectorXd window;
};

Attempt simulate(const NormalizedLaplacian& L, const WaveParams& p, std::mt19937_64& rng) {
  const auto n = L.matrix.rows();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd u0(n);
  for (Eigen::Index i = 0; i < n; ++i) u0(i) = unif(rng);

  auto state = WaveState::start(u0, p.t_max);
  for (std::size_t t = 0; t < p.t_max; ++t) state = wave_step(std::move(state), L, p.c);

  Attempt at;
  at.window = analysis_window(p.t_max);
  at.history = std::move(state.history);
  const double wsum = at.window.sum();

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> series(p.t_max);
  std::vector<std::complex<double>> spec;
  Eigen::VectorXd mag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.t_max / 2 + 1));
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = at.history.row(i);
    const double mean = row.dot(at.window) / wsum;
    for (std::size_t t = 0; t < p.t_max; ++t) {
      series[t] = (row(static_cast<Eigen::Index>(t)) - mean) * at.window(static_cast<Eigen::Index>(t));
    }
    fft.fwd(spec, series);
    for (Eigen::Index b = 0; b < mag.size(); ++b) mag(b) += std::abs(spec[static_cast<std::size_t>(b)]);
  }
  at.peaks = find_peaks(mag, p.t_max, p.peak_rel_threshold);
  return at;
}

}  // namespace

ClusterAssignment run_wave_clustering(const WeightedGraph& g, const WaveParams& params) {
  params.validate();
  if (!is_connected(g)) throw PreconditionError("wave clustering requires a connected graph");
  return run_wave_clustering(laplacian(g), params);
}

ClusterAssignment run_wave_clustering(const NormalizedLaplacian& L, const WaveParams& params) {
  params.validate();
  if (!laplacian_connected(L)) throw PreconditionError("wave clustering requires a connected graph");
  const auto n = L.matrix.rows();
  const std::size_t k = params.k;

  std::mt19937_64 rng(params.seed);
  ClusterAssignment out;
  Attempt at = simulate(L, params, rng);
  if (at.peaks.size() < k) {
    out.warnings.push_back("only " + std::to_string(at.peaks.size()) + " spectral peaks found; re-randomized u(0)");
    out.restarts = 1;
    at = simulate(L, params, rng);
  }
  if (at.peaks.size() < k) {
    throw InsufficientResolution("found " + std::to_string(at.peaks.size()) + " spectral peaks, need " +
                                 std::to_string(k) + "; increase t_max");
  }

  out.signs.resize(n, static_cast<Eigen::Index>(k));
  const auto T = static_cast<Eigen::Index>(params.t_max);
  const double wsum = at.window.sum();
  for (std::size_t j = 0; j < k; ++j) {
    const double omega = at.peaks[j].omega;
    out.frequencies.push_back(omega);
    out.eigenvalue_estimates.push_back(2.0 * (1.0 - std::cos(omega)) / (params.c * params.c));
    // Column t holds u(t+1); with u(-1) = u(0) every mode is a cosine in (t + 1/2), so referencing
    // the phase to time -1/2 makes the coefficient real with the sign of the mode amplitude.
    Eigen::VectorXd re(T);
    for (Eigen::Index t = 0; t < T; ++t) {
      re(t) = at.window(t) * std::cos(omega * (static_cast<double>(t) + 1.5));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      auto row = at.history.row(i);
      const double mean = row.dot(at.window) / wsum;
      Eigen::VectorXd centred = row.transpose().array() - mean;
      const double coef = centred.dot(re);
      out.signs(i, static_cast<Eigen::Index>(j)) = coef > 0.0 ? 1 : 0;
    }
  }
  out.labels = assemble_labels(out.signs);
  return out;
}

Eigen::VectorXd heat_iterate(const NormalizedLaplacian& L, const Eigen::VectorXd& u0, std::size_t steps) {
  if (u0.size() != L.matrix.rows()) throw ValidationError("initial vector length does not match the Laplacian");
  Eigen::VectorXd u = u0;
  for (std::size_t t = 0; t < steps; ++t) {
    Eigen::VectorXd next = u - L.matrix * u;
    u = std::move(next);
  }
  return u;
}

ClusterAssignment spectral_reference(const WeightedGraph& g, std::size_t k) {
  if (k < 1 || k > 31) throw ValidationError("k must be in 1..31");
  if (!is_connected(g)) throw PreconditionError("spectral reference requires a connected graph");
  if (k + 1 > g.size()) throw ValidationError("k + 1 exceeds the node count");
  const auto spec = dense_spectrum(laplacian(g));
  const auto n = static_cast<Eigen::Index>(g.size());
  ClusterAssignment out;
  out.signs.resize(n, static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    const auto& pair = spec[j + 1];
    out.eigenvalue_estimates.push_back(pair.value);
    const double lo = spec[j].value;
    const double hi = j + 2 < spec.size() ? spec[j + 2].value : INFINITY;
    if (pair.value - lo < 1e-10 || hi - pair.value < 1e-10) {
      out.warnings.push_back("eigenvalue " + std::to_string(pair.value) + " (index " + std::to_string(j + 2) +
                             ") is repeated within 1e-10; its eigenvector sign pattern is ambiguous");
    }
    for (Eigen::Index i = 0; i < n; ++i) out.signs(i, static_cast<Eigen::Index>(j)) = pair.vector(i) > 0.0 ? 1 : 0;
  }
  out.labels = assemble_labels(out.signs);
  return out;
}

double label_agreement(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) throw ValidationError("label vectors differ in length");
  if (a.empty()) return 1.0;
  std::uint32_t m = 0;
  for (auto x : a) m = std::max(m, x);
  for (auto x : b) m = std::max(m, x);
  const auto dim = static_cast<Eigen::Index>(m) + 1;
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < a.size(); ++i) table(a[i], b[i]) += 1.0;
  const auto sigma = max_weight_assignment(table);
  double matched = 0.0;
  for (Eigen::Index r = 0; r < dim; ++r) matched += table(r, static_cast<Eigen::Index>(sigma[static_cast<std::size_t>(r)]));
  return matched / static_cast<double>(a.size());
}

}  // namespace dynopt
