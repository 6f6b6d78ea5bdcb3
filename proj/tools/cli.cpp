#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynopt/ctds_sat.hpp"
#include "dynopt/errors.hpp"
#include "dynopt/graph.hpp"
#include "dynopt/koopman.hpp"
#include "dynopt/laplacian.hpp"
#include "dynopt/sim_bifurcation.hpp"
#include "dynopt/tsp.hpp"
#include "dynopt/wave_cluster.hpp"

namespace dynopt::cli {
namespace {

using json = nlohmann::ordered_json;

struct Report {
  json config = json::object();
  json metrics = json::object();
  json oracle = json::object();
  json warnings = json::array();
  std::string summary;
  int exit_code = kExitOk;
};

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json complex_list(const Eigen::VectorXcd& v, std::size_t limit) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size() && static_cast<std::size_t>(i) < limit; ++i)
    out.push_back({v(i).real(), v(i).imag()});
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

GraphFormat infer_format(const std::string& path, const std::string& flag) {
  if (!flag.empty()) return parse_graph_format(flag);
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".el" || ext == ".edges" || ext == ".txt") return GraphFormat::EdgeList;
  if (ext == ".mtx" || ext == ".mm") return GraphFormat::MatrixMarket;
  if (ext == ".rudy" || ext == ".gset") return GraphFormat::Rudy;
  throw ValidationError("cannot infer the graph format of '" + path + "'; pass --format");
}

// ---- cluster ----

struct ClusterOpts {
  std::string graph;
  std::string format;
  WaveParams wave;
  bool oracle = false;
};

void add_cluster(CLI::App& app, ClusterOpts& o) {
  auto* sub = app.add_subcommand("cluster", "wave-equation spectral clustering");
  sub->add_option("--graph", o.graph, "graph file")->required();
  sub->add_option("--format", o.format, "edge-list, matrix-market or rudy (default: from the extension)");
  sub->add_option("--k", o.wave.k, "eigenvectors used, 2^k clusters")->capture_default_str();
  sub->add_option("--c", o.wave.c, "wave speed, 0 < c < sqrt(2)")->capture_default_str();
  sub->add_option("--tmax", o.wave.t_max, "iterations")->capture_default_str();
  sub->add_option("--threshold", o.wave.peak_rel_threshold, "relative peak threshold")->capture_default_str();
  sub->add_option("--seed", o.wave.seed, "initial condition seed")->capture_default_str();
  sub->add_flag("--oracle", o.oracle, "compare with the dense spectrum (always on for n <= 2000)");
}

void run_cluster(const ClusterOpts& o, Report& r) {
  const auto format = infer_format(o.graph, o.format);
  r.config = {{"graph", o.graph}, {"format", std::string(to_string(format))}, {"k", o.wave.k},
              {"c", o.wave.c},    {"tmax", o.wave.t_max},                    {"threshold", o.wave.peak_rel_threshold},
              {"seed", o.wave.seed}, {"oracle", o.oracle}};
  const auto g = load_graph(o.graph, format);
  const auto L = laplacian(g);
  const auto res = run_wave_clustering(L, o.wave);

  std::vector<std::size_t> sizes(std::size_t{1} << o.wave.k, 0);
  for (auto l : res.labels) ++sizes[l];
  r.metrics = {{"n", g.size()},
               {"edges", g.edges().size()},
               {"labels", res.labels},
               {"cluster_sizes", sizes},
               {"frequencies", res.frequencies},
               {"eigenvalue_estimates", res.eigenvalue_estimates},
               {"restarts", res.restarts}};
  for (const auto& w : res.warnings) r.warnings.push_back(w);

  std::string extra;
  if (o.oracle || g.size() <= 2000) {
    const auto ref = spectral_reference(g, o.wave.k);
    const double agree = label_agreement(res.labels, ref.labels);
    double err = 0.0;
    for (std::size_t j = 0; j < ref.eigenvalue_estimates.size() && j < res.eigenvalue_estimates.size(); ++j)
      err = std::max(err, std::abs(ref.eigenvalue_estimates[j] - res.eigenvalue_estimates[j]));
    r.oracle = {{"method", "dense spectrum"},
                {"labels", ref.labels},
                {"agreement", agree},
                {"eigenvalues", ref.eigenvalue_estimates},
                {"max_eigenvalue_error", err}};
    for (const auto& w : ref.warnings) r.warnings.push_back("oracle: " + w);
    extra = " oracle_agreement=" + fmt(agree);
  }
  r.summary = "cluster: n=" + std::to_string(g.size()) + " groups=" +
              std::to_string(std::count_if(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; })) + extra;
}

// ---- tsp ----

struct TspOpts {
  std::string instance;
  std::string mode = "pipeline";
  double beta = 0.5;
  std::size_t kappa = 5;
  double dt = 1e-3;
  std::size_t steps = 10000;
  std::string signs = "identity";
  std::uint64_t seed = 0;
};

void add_tsp(CLI::App& app, TspOpts& o) {
  auto* sub = app.add_subcommand("tsp", "permutation-manifold TSP heuristics");
  sub->add_option("--instance", o.instance, "TSPLIB file")->required();
  sub->add_option("--mode", o.mode, "flow, procrustes, 2opt or pipeline")
      ->check(CLI::IsMember({"flow", "procrustes", "2opt", "pipeline"}))
      ->capture_default_str();
  sub->add_option("--beta", o.beta, "P-nearness weight")->capture_default_str();
  sub->add_option("--kappa", o.kappa, "candidates per city")->capture_default_str();
  sub->add_option("--dt", o.dt, "flow step")->capture_default_str();
  sub->add_option("--steps", o.steps, "flow steps")->capture_default_str();
  sub->add_option("--signs", o.signs, "Procrustes signs: identity, random or greedy")
      ->check(CLI::IsMember({"identity", "random", "greedy"}))
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "seed for random signs")->capture_default_str();
}

json tour_json(const Tour& t) { return {{"order", t.order}, {"cost", t.cost}}; }

void run_tsp(const TspOpts& o, Report& r) {
  r.config = {{"instance", o.instance}, {"mode", o.mode},   {"beta", o.beta},   {"kappa", o.kappa},
              {"dt", o.dt},             {"steps", o.steps}, {"signs", o.signs}, {"seed", o.seed}};
  const auto D = load_tsplib(o.instance);
  const std::size_t n = D.size();
  if (!D.symmetric) throw UnsupportedError("tsp modes need a symmetric instance");
  if (n < 3) throw ValidationError("tsp needs at least 3 cities");
  const auto A = flow_cost_matrix(D);
  const auto B = cycle_adjacency(n);
  const auto strategy = o.signs == "random" ? SignStrategy::Random
                        : o.signs == "greedy" ? SignStrategy::Greedy
                                              : SignStrategy::Identity;

  Tour result;
  r.metrics["n"] = n;
  if (o.mode == "flow") {
    FlowState start;
    start.P.p = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    FlowOptions opt;
    opt.dt = o.dt;
    opt.steps = o.steps;
    opt.record_every = 0;
    const auto traj = gradient_flow(A, B.t, start, opt);
    const auto& last = traj.back();
    result = nearest_permutation(last.P.p, D);
    r.metrics["initial_cost"] = tour_cost(D, nearest_permutation(start.P.p));
    r.metrics["flow"] = {{"time", last.time},
                         {"lambda", last.lambda},
                         {"constraint_residual", last.constraint_residual},
                         {"orthogonality_defect", last.P.orthogonality_defect},
                         {"trace_cost", trace_cost(A, B.t, last.P.p)}};
  } else if (o.mode == "procrustes") {
    const auto sol = procrustes_solve(A, B.t, strategy, o.seed);
    result = nearest_permutation(sol.P.p, D);
    r.metrics["procrustes"] = {{"residual", sol.residual}, {"signs", to_json(sol.signs)}};
    for (const auto& w : sol.warnings) r.warnings.push_back(w);
  } else {
    const auto cands = pnearness_candidates(D, o.beta, o.kappa);
    Tour start;
    if (o.mode == "2opt") {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      start = make_tour(D, order);
    } else {
      const auto sol = procrustes_solve(A, B.t, strategy, o.seed);
      start = nearest_permutation(sol.P.p, D);
      r.metrics["procrustes"] = {{"residual", sol.residual}, {"signs", to_json(sol.signs)}};
      for (const auto& w : sol.warnings) r.warnings.push_back(w);
    }
    const auto opt = two_opt(D, start, cands);
    result = opt.tour;
    r.metrics["initial_cost"] = start.cost;
    r.metrics["moves"] = opt.moves;
    r.metrics["candidate_coverage"] = candidate_coverage(cands, result.order);
  }
  r.metrics["tour"] = result.order;
  r.metrics["cost"] = result.cost;

  std::string extra;
  if (n <= 12) {
    const auto best = brute_force_tsp(D);
    const double gap = result.cost - best.cost;
    r.oracle = {{"method", "brute force"},
                {"optimum", tour_json(best)},
                {"gap", gap},
                {"optimal", std::abs(gap) <= 1e-9 * std::max(1.0, best.cost)}};
    extra = " optimum=" + fmt(best.cost);
  }
  r.summary = "tsp " + o.mode + ": n=" + std::to_string(n) + " cost=" + fmt(result.cost) + extra;
}

// ---- maxcut ----

struct MaxcutOpts {
  std::string graph;
  std::string format;
  SbParams sb;
  std::size_t restarts = 1;
};

void add_maxcut(CLI::App& app, MaxcutOpts& o) {
  auto* sub = app.add_subcommand("maxcut", "MAX-CUT by simulated bifurcation");
  sub->add_option("--graph", o.graph, "graph file")->required();
  sub->add_option("--format", o.format, "edge-list, matrix-market or rudy (default: from the extension)");
  sub->add_option("--dt", o.sb.dt, "time step")->capture_default_str();
  sub->add_option("--steps", o.sb.t_steps, "steps of the pump ramp")->capture_default_str();
  sub->add_option("--pfinal", o.sb.p_final, "final pump (default 2 x detuning)");
  sub->add_option("--xi", o.sb.xi0, "coupling scale (default 0.7 detuning / RMS row norm)");
  sub->add_option("--kerr", o.sb.kerr, "Kerr coefficient")->capture_default_str();
  sub->add_option("--detuning", o.sb.detuning, "detuning")->capture_default_str();
  sub->add_option("--restarts", o.restarts, "independent runs")->capture_default_str();
  sub->add_option("--seed", o.sb.seed, "seed of the first run")->capture_default_str();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void run_maxcut(const MaxcutOpts& o, Report& r) {
  const auto format = infer_format(o.graph, o.format);
  r.config = {{"graph", o.graph},       {"format", std::string(to_string(format))},
              {"dt", o.sb.dt},          {"steps", o.sb.t_steps},
              {"pfinal", optional_json(o.sb.p_final)}, {"xi", optional_json(o.sb.xi0)},
              {"kerr", o.sb.kerr},      {"detuning", o.sb.detuning},
              {"restarts", o.restarts}, {"seed", o.sb.seed}};
  if (o.restarts == 0) throw ValidationError("--restarts must be at least 1");
  const auto prob = maxcut_to_ising(load_graph(o.graph, format));
  const auto res = sb_solve(prob, o.sb, o.restarts);
  const auto& best = res.best.best;
  r.metrics = {{"n", prob.size()},
               {"cut", *best.cut},
               {"energy", best.energy},
               {"spins", best.s},
               {"best_restart", res.best_restart},
               {"restart_energies", res.energies},
               {"xi0", res.best.xi0},
               {"p_final", res.best.p_final}};
  std::string extra;
  if (prob.size() <= 20) {
    const auto opt = brute_force_ising(prob);
    r.oracle = {{"method", "brute force"},
                {"optimum_cut", *opt.cut},
                {"optimum_energy", opt.energy},
                {"gap", *opt.cut - *best.cut},
                {"optimal", *opt.cut - *best.cut <= 1e-9 * std::max(1.0, *opt.cut)}};
    extra = " optimum=" + fmt(*opt.cut);
  }
  r.summary = "maxcut: n=" + std::to_string(prob.size()) + " cut=" + fmt(*best.cut) + extra;
}

// ---- sat ----

struct SatOpts {
  std::string cnf;
  std::string mode = "solve";
  CtdsParams ctds;
  FsleParams fsle;
  std::size_t trace_points = 200;
};

void add_sat(CLI::App& app, SatOpts& o) {
  auto* sub = app.add_subcommand("sat", "continuous-time SAT dynamics");
  sub->add_option("--cnf", o.cnf, "DIMACS CNF file")->required();
  sub->add_option("--mode", o.mode, "solve, maxsat or fsle")
      ->check(CLI::IsMember({"solve", "maxsat", "fsle"}))
      ->capture_default_str();
  sub->add_option("--dt", o.ctds.dt, "integration step")->capture_default_str();
  sub->add_option("--budget", o.ctds.t_budget, "time budget")->capture_default_str();
  sub->add_option("--a-cap", o.ctds.a_cap, "rescale threshold of the clause weights")->capture_default_str();
  sub->add_option("--max-ds", o.ctds.max_ds, "step limiter on s")->capture_default_str();
  sub->add_option("--record-every", o.ctds.record_every, "V trace stride in steps")->capture_default_str();
  sub->add_option("--trace-points", o.trace_points, "V trace entries kept in the report")->capture_default_str();
  sub->add_option("--seed", o.ctds.seed, "initial state seed")->capture_default_str();
  sub->add_option("--pairs", o.fsle.n_pairs, "FSLE trajectory pairs")->capture_default_str();
  sub->add_option("--delta0", o.fsle.delta0, "FSLE initial separation")->capture_default_str();
  sub->add_option("--delta1", o.fsle.delta1, "FSLE target separation")->capture_default_str();
  sub->add_option("--fsle-tmax", o.fsle.t_max, "FSLE time limit per pair")->capture_default_str();
}

json subsample(const std::vector<std::pair<double, double>>& trace, std::size_t limit) {
  json out = json::array();
  if (trace.empty() || limit == 0) return out;
  const std::size_t stride = std::max<std::size_t>(1, (trace.size() + limit - 1) / limit);
  for (std::size_t i = 0; i < trace.size(); i += stride) out.push_back({trace[i].first, trace[i].second});
  if ((trace.size() - 1) % stride != 0) out.push_back({trace.back().first, trace.back().second});
  return out;
}

void run_sat(const SatOpts& o, Report& r) {
  r.config = {{"cnf", o.cnf},
              {"mode", o.mode},
              {"dt", o.ctds.dt},
              {"budget", o.ctds.t_budget},
              {"a_cap", o.ctds.a_cap},
              {"max_ds", o.ctds.max_ds},
              {"record_every", o.ctds.record_every},
              {"trace_points", o.trace_points},
              {"seed", o.ctds.seed}};
  if (o.mode == "fsle")
    r.config["fsle"] = {
        {"pairs", o.fsle.n_pairs}, {"delta0", o.fsle.delta0}, {"delta1", o.fsle.delta1}, {"tmax", o.fsle.t_max}};
  const auto f = load_cnf(o.cnf);
  for (const auto& w : f.warnings) r.warnings.push_back(w);
  r.metrics = {{"n_vars", f.n_vars}, {"n_clauses", f.n_clauses()}, {"alpha", f.alpha()}};

  if (o.mode == "fsle") {
    const auto est = fsle_measure(f, o.ctds, o.fsle);
    const std::size_t censored = est.censored_converged + est.censored_satisfied + est.censored_timeout;
    const bool defined = censored < o.fsle.n_pairs;
    r.metrics["fsle"] = {{"exponent", defined ? json(est.exponent) : json(nullptr)},
                         {"mean_rate", est.mean_rate},
                         {"ci95", {est.ci_low, est.ci_high}},
                         {"taus", est.taus},
                         {"censored_converged", est.censored_converged},
                         {"censored_satisfied", est.censored_satisfied},
                         {"censored_timeout", est.censored_timeout}};
    if (censored > 0)
      r.warnings.push_back(std::to_string(censored) + " of " + std::to_string(o.fsle.n_pairs) +
                           " FSLE pairs censored");
    if (!defined) r.exit_code = kExitUnknown;
    r.summary = "sat fsle: mean_rate=" + fmt(est.mean_rate) +
                (defined ? " exponent=" + fmt(est.exponent) : std::string(" exponent undefined (all censored)"));
    return;
  }

  const auto out = ctds_solve(f, o.ctds);
  const bool sat = out.status == SatStatus::Sat;
  r.metrics["status"] = sat ? "SAT" : "UNKNOWN";
  r.metrics["assignment"] = out.best_assignment;
  r.metrics["best_satisfied"] = out.best_satisfied;
  r.metrics["phi"] = out.best_satisfied;
  r.metrics["steps"] = out.steps;
  r.metrics["time"] = out.time;
  r.metrics["a_rescales"] = out.a_rescales;
  r.metrics["log_a_max"] = out.log_a_max;
  r.metrics["v_trace"] = subsample(out.v_trace, o.trace_points);
  if (out.a_rescales > 0)
    r.warnings.push_back("clause weights rescaled " + std::to_string(out.a_rescales) + " times at a_cap");
  const auto recount = evaluate_assignment(f, out.best_assignment);
  r.oracle = {{"method", "clause recount"},
              {"satisfied", recount},
              {"consistent", recount == out.best_satisfied && (!sat || recount == f.n_clauses())}};
  if (!sat && o.mode == "solve") r.exit_code = kExitUnknown;
  r.summary = "sat " + o.mode + ": " + (sat ? "SAT" : "UNKNOWN") + " satisfied " +
              std::to_string(out.best_satisfied) + "/" + std::to_string(f.n_clauses());
}

// ---- koopman ----

struct KoopmanOpts {
  std::string source = "himmelblau";
  std::string csv;
  std::string dict = "default";
  std::size_t centers = 50;
  double width_factor = 2.0;
  std::size_t horizon = 5;
  std::uint64_t seed = 0;
  std::optional<double> step;
  std::size_t samples = 2000;
  std::size_t dim = 2;
  int degree = 3;
  std::size_t burst = 100;
  std::size_t basin_points = 1000;
  std::size_t basin_fns = 3;
  std::optional<std::size_t> groups;
  std::size_t n_eigenvalues = 10;
};

void add_koopman(CLI::App& app, KoopmanOpts& o) {
  auto* sub = app.add_subcommand("koopman", "EDMD approximation of descent and Newton maps");
  sub->add_option("--source", o.source, "himmelblau, quadratic, newton or csv")
      ->check(CLI::IsMember({"himmelblau", "quadratic", "newton", "csv"}))
      ->capture_default_str();
  sub->add_option("--csv", o.csv, "snapshot pairs for --source csv");
  sub->add_option("--dict", o.dict, "default, linear, polyD, rbf or polyD+rbf")->capture_default_str();
  sub->add_option("--centers", o.centers, "radial centers")->capture_default_str();
  sub->add_option("--width-factor", o.width_factor, "radial width over the median center spacing")
      ->capture_default_str();
  sub->add_option("--horizon", o.horizon, "prediction horizon")->capture_default_str();
  sub->add_option("--seed", o.seed, "sampling and clustering seed")->capture_default_str();
  sub->add_option("--step", o.step, "descent step (default 1e-3 himmelblau, 0.01 quadratic)");
  sub->add_option("--samples", o.samples, "training pairs")->capture_default_str();
  sub->add_option("--dim", o.dim, "quadratic dimension")->capture_default_str();
  sub->add_option("--degree", o.degree, "Newton polynomial z^d - 1, d in {2, 3}")
      ->check(CLI::Range(2, 3))
      ->capture_default_str();
  sub->add_option("--burst", o.burst, "descent steps per pair of the basin fit")->capture_default_str();
  sub->add_option("--basin-points", o.basin_points, "points labelled by basin (0 skips)")->capture_default_str();
  sub->add_option("--basin-fns", o.basin_fns, "eigenfunctions used as basin features")->capture_default_str();
  sub->add_option("--groups", o.groups, "basin group count (default: automatic)");
  sub->add_option("--eigenvalues", o.n_eigenvalues, "eigenvalues reported")->capture_default_str();
}

std::vector<std::complex<double>> unit_roots(int degree) {
  std::vector<std::complex<double>> roots;
  for (int j = 0; j < degree; ++j) roots.push_back(std::polar(1.0, 2.0 * M_PI * j / degree));
  return roots;
}

// basin index of a converged himmelblau point, -1 when descent has not settled within 1e-8
int himmelblau_basin(const Eigen::MatrixXd& start) {
  const auto obj = himmelblau();
  const auto mins = himmelblau_minima();
  Eigen::MatrixXd x = start;
  for (int chunk = 0; chunk < 400; ++chunk) {
    x = gd_apply(obj, x, 0.01, 250);
    for (std::size_t j = 0; j < mins.size(); ++j)
      if ((x.row(0).transpose() - Eigen::VectorXd(mins[j])).norm() < 1e-8) return static_cast<int>(j);
  }
  return -1;
}

void run_koopman(const KoopmanOpts& o, Report& r) {
  const bool descent = o.source == "himmelblau" || o.source == "quadratic";
  const double step = o.step.value_or(o.source == "quadratic" ? 0.01 : 1e-3);
  r.config = {{"source", o.source}, {"dict", o.dict}, {"centers", o.centers}, {"width_factor", o.width_factor},
              {"horizon", o.horizon}, {"seed", o.seed}};
  if (o.source == "csv") {
    r.config["csv"] = o.csv;
  } else {
    r.config["samples"] = o.samples;
    if (descent) r.config["step"] = step;
    if (o.source == "quadratic") r.config["dim"] = o.dim;
    if (o.source == "newton") r.config["degree"] = o.degree;
  }
  if (descent) {
    r.config["burst"] = o.burst;
    r.config["basin_points"] = o.basin_points;
    r.config["basin_fns"] = o.basin_fns;
    r.config["groups"] = o.groups ? json(*o.groups) : json(nullptr);
  }
  if (o.horizon == 0) throw ValidationError("--horizon must be at least 1");
  if (o.source == "csv" && o.csv.empty()) throw ValidationError("--source csv needs --csv FILE");

  Objective obj;
  std::vector<std::complex<double>> roots;
  SnapshotPairs pairs;
  double lo = -5.0, hi = 5.0;
  if (o.source == "himmelblau") obj = himmelblau();
  if (o.source == "quadratic") obj = quadratic(o.dim);
  if (o.source == "newton") {
    roots = unit_roots(o.degree);
    lo = -2.0;
    hi = 2.0;
  }
  if (o.source == "csv") {
    pairs = load_snapshot_csv(o.csv);
  } else {
    const auto xs = uniform_points(o.samples, descent ? obj.dim : 2, lo, hi, o.seed);
    pairs = descent ? gd_pairs(obj, xs, step, 1) : newton_pairs(roots, xs);
  }
  const auto advance = [&](const Eigen::MatrixXd& pts) -> Eigen::MatrixXd {
    return descent ? gd_apply(obj, pts, step, 1) : newton_apply(roots, pts, 1);
  };

  auto spec = DictionarySpec::parse(o.dict, o.centers);
  spec.width_factor = o.width_factor;
  spec.seed = o.seed;
  const auto dict = build_dictionary(spec, pairs.xs);
  const auto fit = edmd_fit(pairs, dict);
  const auto sd = spectrum(fit);
  if (sd.defective) r.warnings.push_back("eigenvector matrix numerically singular; modes not computed");

  // held-out pairs for generated sources, the training pairs for csv
  SnapshotPairs held = pairs;
  if (o.source != "csv") {
    held.xs = uniform_points(200, pairs.dim(), lo, hi, o.seed + 1);
    held.ys = advance(held.xs);
  }
  json efn = json::array();
  const std::size_t n_report = std::min<std::size_t>(o.n_eigenvalues, static_cast<std::size_t>(sd.eigenvalues.size()));
  for (std::size_t k = 0; k < n_report; ++k) efn.push_back(eigenfunction_residual(sd, dict, held, k));

  r.metrics = {{"state_dim", pairs.dim()},
               {"pairs", pairs.size()},
               {"dictionary_size", dict.size()},
               {"rbf_width", dict.width},
               {"fit_residual", fit.residual},
               {"eigenvalues", complex_list(sd.eigenvalues, n_report)},
               {"eig_residual", sd.eig_residual},
               {"defective", sd.defective},
               {"constant_eigenpair", constant_eigenpair(sd)},
               {"eigenfunction_residuals", efn}};

  // state prediction error per horizon; csv data only supports one step, in sample
  const std::size_t horizon = o.source == "csv" ? 1 : o.horizon;
  std::vector<double> rmse(horizon, 0.0), median(horizon, 0.0);
  Eigen::MatrixXd truth = held.xs;
  std::vector<Eigen::MatrixXd> preds;
  for (Eigen::Index i = 0; i < held.xs.rows(); ++i)
    preds.push_back(predict_state(fit, dict, held.xs.row(i).transpose(), horizon));
  for (std::size_t h = 1; h <= horizon; ++h) {
    truth = o.source == "csv" ? held.ys : advance(truth);
    double se = 0.0;
    std::vector<double> errs;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
      const double e2 =
          (preds[static_cast<std::size_t>(i)].row(static_cast<Eigen::Index>(h)) - truth.row(i)).squaredNorm();
      se += e2;
      errs.push_back(std::sqrt(e2));
    }
    rmse[h - 1] = std::sqrt(se / static_cast<double>(truth.size()));
    std::nth_element(errs.begin(), errs.begin() + static_cast<std::ptrdiff_t>(errs.size() / 2), errs.end());
    median[h - 1] = errs[errs.size() / 2];
  }
  r.metrics["prediction"] = {{"in_sample", o.source == "csv"}, {"rmse", rmse}, {"median_error", median}};
  if (!std::all_of(rmse.begin(), rmse.end(), [](double x) { return std::isfinite(x); }))
    r.warnings.push_back("prediction error not finite");
  std::string summary = "koopman " + o.source + ": dict=" + std::to_string(dict.size()) +
                        " rmse@" + std::to_string(horizon) + "=" + fmt(rmse.back());

  if (o.source == "newton") {
    std::size_t k = 0;
    while (k < static_cast<std::size_t>(sd.eigenvalues.size()) && k == constant_eigenpair(sd)) ++k;
    json probes = json::array();
    const std::vector<double> radii{0.5, 0.1, 0.02};
    for (const auto& z : roots)
      probes.push_back({{"root", {z.real(), z.imag()}},
                        {"radii", radii},
                        {"max_abs", eigenfunction_growth(sd, dict, k, Eigen::Vector2d(z.real(), z.imag()), radii)}});
    r.metrics["eigenfunction_growth"] = {{"eigenpair", k}, {"probes", probes}};
  }

  if (descent && o.basin_points > 0) {
    const auto bfit = edmd_fit(gd_pairs(obj, pairs.xs, step, o.burst), dict);
    const auto bsd = spectrum(bfit);
    const auto pts = uniform_points(o.basin_points, obj.dim, lo, hi, o.seed + 2);
    const auto bl = basin_label(bsd, dict, pts, o.basin_fns, o.groups, o.seed);
    std::vector<std::size_t> sizes(bl.n_groups, 0);
    for (auto l : bl.labels) ++sizes[l];
    r.metrics["basins"] = {{"n_groups", bl.n_groups},
                           {"group_sizes", sizes},
                           {"eigenpairs", bl.eigenpairs},
                           {"labels", bl.labels}};
    summary += " basins=" + std::to_string(bl.n_groups);
    if (o.source == "himmelblau") {
      std::vector<std::uint32_t> a, b;
      std::size_t unsettled = 0;
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const int g = himmelblau_basin(pts.row(i));
        if (g < 0) {
          ++unsettled;
          continue;
        }
        a.push_back(static_cast<std::uint32_t>(bl.labels[static_cast<std::size_t>(i)]));
        b.push_back(static_cast<std::uint32_t>(g));
      }
      const double agree = label_agreement(a, b);
      r.oracle = {{"method", "descent run to 1e-8 of a minimum"}, {"basin_agreement", agree}, {"unsettled", unsettled}};
      if (unsettled > 0) r.warnings.push_back(std::to_string(unsettled) + " ground-truth points did not settle");
      summary += " basin_agreement=" + fmt(agree);
    }
  }
  r.summary = summary;
}

// ---- driver ----

int emit(const Report& r, const std::string& subcommand, const std::string& json_out, double seconds,
         std::ostream& out, std::ostream& err) {
  json report = {{"schema_version", kSchemaVersion}, {"subcommand", subcommand}, {"config", r.config},
                 {"metrics", r.metrics},             {"oracle", r.oracle},       {"warnings", r.warnings},
                 {"timing", {{"wall_seconds", seconds}}}};
  report["config"]["json"] = json_out;
  const auto text = report.dump(2) + "\n";
  if (json_out == "-") {
    out << text;
  } else {
    std::ofstream file(json_out);
    if (!file) throw IoError("cannot write report '" + json_out + "'");
    file << text;
  }
  err << r.summary << "\n";
  for (const auto& w : r.warnings) err << "warning: " << w.get<std::string>() << "\n";
  return r.exit_code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"dynopt: dynamical-systems solvers for clustering, TSP, MAX-CUT, SAT and Koopman analysis"};
  app.name("dynopt");
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  std::string json_out = "-";
  app.add_option("--json", json_out, "report path, - for stdout")->capture_default_str();

  ClusterOpts cluster;
  TspOpts tsp;
  MaxcutOpts maxcut;
  SatOpts sat;
  KoopmanOpts koopman;
  add_cluster(app, cluster);
  add_tsp(app, tsp);
  add_maxcut(app, maxcut);
  add_sat(app, sat);
  add_koopman(app, koopman);
  // --json is also accepted after the subcommand
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<const char*> argv{"dynopt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run 'dynopt --help' for usage\n";
    return kExitUsage;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  Report report;
  try {
    if (name == "cluster") run_cluster(cluster, report);
    if (name == "tsp") run_tsp(tsp, report);
    if (name == "maxcut") run_maxcut(maxcut, report);
    if (name == "sat") run_sat(sat, report);
    if (name == "koopman") run_koopman(koopman, report);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return emit(report, name, json_out, seconds, out, err);
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const dynopt::ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const PreconditionError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const UnsupportedError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    // NumericalError, InsufficientResolution: the solver failed on valid input
    err << "solver failure: " << e.what() << "\n";
    return kExitUnknown;
  }
}

}  // namespace dynopt::cli
