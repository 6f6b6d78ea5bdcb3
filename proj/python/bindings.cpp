#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "cli.hpp"
#include "dynopt/ctds_sat.hpp"
#include "dynopt/errors.hpp"
#include "dynopt/graph.hpp"
#include "dynopt/koopman.hpp"
#include "dynopt/laplacian.hpp"
#include "dynopt/sim_bifurcation.hpp"
#include "dynopt/tsp.hpp"
#include "dynopt/wave_cluster.hpp"

namespace py = pybind11;
using namespace dynopt;

namespace {

SignStrategy parse_strategy(const std::string& s) {
  if (s == "identity") return SignStrategy::Identity;
  if (s == "random") return SignStrategy::Random;
  if (s == "greedy") return SignStrategy::Greedy;
  throw ValidationError("unknown sign strategy '" + s + "'");
}

Objective objective(const std::string& name, std::size_t dim) {
  if (name == "himmelblau") return himmelblau();
  if (name == "quadratic") return quadratic(dim);
  if (name == "double_well") return double_well(dim);
  throw ValidationError("unknown objective '" + name + "'");
}

// DIMACS-style clauses: signed 1-based literals
CnfFormula formula_from_lists(std::size_t n_vars, const std::vector<std::vector<int>>& clauses) {
  std::vector<Clause> cs;
  for (const auto& c : clauses) {
    Clause cl;
    for (int lit : c) {
      if (lit == 0) throw ValidationError("literal 0 inside a clause");
      cl.push_back({static_cast<std::uint32_t>(std::abs(lit) - 1), static_cast<std::int8_t>(lit > 0 ? 1 : -1)});
    }
    cs.push_back(std::move(cl));
  }
  return make_formula(n_vars, std::move(cs));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dynamical-systems solvers: wave clustering, TSP flows, simulated bifurcation, CTDS SAT, EDMD";

  // base first: pybind11 tries the most recently registered translator first
  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<InsufficientResolution>(m, "InsufficientResolution", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  // ---- graph-core ----
  py::class_<WeightedGraph>(m, "Graph")
      .def(py::init([](std::size_t n, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
                       bool directed) {
             std::vector<Edge> es;
             for (const auto& [i, j, w] : edges) es.push_back({i, j, w});
             return WeightedGraph(n, std::move(es), directed);
           }),
           py::arg("n"), py::arg("edges"), py::arg("directed") = false)
      .def_property_readonly("n", &WeightedGraph::size)
      .def_property_readonly("directed", &WeightedGraph::directed)
      .def_property_readonly("edges",
                             [](const WeightedGraph& g) {
                               std::vector<std::tuple<std::size_t, std::size_t, double>> out;
                               for (const auto& e : g.edges()) out.emplace_back(e.i, e.j, e.w);
                               return out;
                             })
      .def("adjacency", &WeightedGraph::adjacency)
      .def("__len__", &WeightedGraph::size);
  m.def(
      "load_graph",
      [](const std::filesystem::path& path, const std::string& format) {
        return load_graph(path, parse_graph_format(format));
      },
      py::arg("path"), py::arg("format") = "edge-list");
  m.def("connected_components", &connected_components);
  m.def("laplacian_spectrum", [](const WeightedGraph& g) {
    std::vector<double> vals;
    for (const auto& p : dense_spectrum(laplacian(g))) vals.push_back(p.value);
    return vals;
  });

  // ---- wave-cluster ----
  py::class_<ClusterAssignment>(m, "ClusterAssignment")
      .def_readonly("labels", &ClusterAssignment::labels)
      .def_readonly("signs", &ClusterAssignment::signs)
      .def_readonly("frequencies", &ClusterAssignment::frequencies)
      .def_readonly("eigenvalue_estimates", &ClusterAssignment::eigenvalue_estimates)
      .def_readonly("warnings", &ClusterAssignment::warnings)
      .def_readonly("restarts", &ClusterAssignment::restarts);
  m.def(
      "wave_cluster",
      [](const WeightedGraph& g, std::size_t k, double c, std::size_t t_max, std::uint64_t seed, double threshold) {
        WaveParams p;
        p.k = k;
        p.c = c;
        p.t_max = t_max;
        p.seed = seed;
        p.peak_rel_threshold = threshold;
        return run_wave_clustering(g, p);
      },
      py::arg("graph"), py::arg("k") = 1, py::arg("c") = 1.41, py::arg("t_max") = 1024, py::arg("seed") = 0,
      py::arg("threshold") = WaveParams{}.peak_rel_threshold);
  m.def("spectral_reference", &spectral_reference, py::arg("graph"), py::arg("k") = 1);
  m.def("label_agreement", &label_agreement);
  m.def("t_max_bound", &t_max_bound, py::arg("tau"), py::arg("c"), py::arg("n"), py::arg("c_freq") = 10.0,
        py::arg("c_lin") = 1.0);

  // ---- tsp-manifold ----
  py::class_<DistanceMatrix>(m, "DistanceMatrix")
      .def(py::init([](Eigen::MatrixXd d) { return make_distance_matrix(std::move(d)); }), py::arg("d"))
      .def_readonly("d", &DistanceMatrix::d)
      .def_readonly("symmetric", &DistanceMatrix::symmetric)
      .def_readonly("name", &DistanceMatrix::name)
      .def("__len__", &DistanceMatrix::size);
  py::class_<Tour>(m, "Tour").def_readonly("order", &Tour::order).def_readonly("cost", &Tour::cost);
  m.def("load_tsplib", &load_tsplib);
  m.def("euclidean_instance", &euclidean_instance, py::arg("points"), py::arg("tsplib_round") = false);
  m.def("tour_cost", &tour_cost);
  m.def("trace_cost", &trace_cost);
  m.def("permutation_matrix", &permutation_matrix);
  m.def(
      "cycle_adjacency", [](std::size_t n, bool directed) { return cycle_adjacency(n, directed).t; }, py::arg("n"),
      py::arg("directed") = false);
  m.def("flow_cost_matrix", &flow_cost_matrix, py::arg("D"), py::arg("scale") = 10.0);
  m.def(
      "procrustes",
      [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::string& signs, std::uint64_t seed) {
        const auto sol = procrustes_solve(A, B, parse_strategy(signs), seed);
        py::dict d;
        d["P"] = sol.P.p;
        d["signs"] = sol.signs;
        d["residual"] = sol.residual;
        d["warnings"] = sol.warnings;
        return d;
      },
      py::arg("A"), py::arg("B"), py::arg("signs") = "identity", py::arg("seed") = 0);
  m.def(
      "flow_tour",
      [](const DistanceMatrix& D, double dt, std::size_t steps) {
        const auto n = static_cast<Eigen::Index>(D.size());
        FlowState start;
        start.P.p = Eigen::MatrixXd::Identity(n, n);
        FlowOptions opt;
        opt.dt = dt;
        opt.steps = steps;
        opt.record_every = 0;
        const auto traj = gradient_flow(flow_cost_matrix(D), cycle_adjacency(D.size()).t, start, opt);
        return nearest_permutation(traj.back().P.p, D);
      },
      py::arg("D"), py::arg("dt") = 1e-3, py::arg("steps") = 10000, "gradient flow from P = I, then rounding");
  m.def(
      "candidates",
      [](const DistanceMatrix& D, double beta, std::size_t kappa) { return pnearness_candidates(D, beta, kappa).eligible; },
      py::arg("D"), py::arg("beta") = 0.5, py::arg("kappa") = 5);
  m.def(
      "two_opt",
      [](const DistanceMatrix& D, const std::vector<std::size_t>& order, double beta, std::size_t kappa) {
        return two_opt(D, make_tour(D, order), pnearness_candidates(D, beta, kappa)).tour;
      },
      py::arg("D"), py::arg("order"), py::arg("beta") = 0.5, py::arg("kappa") = 5);
  m.def("brute_force_tsp", &brute_force_tsp);

  // ---- sim-bifurcation ----
  py::class_<SpinConfig>(m, "SpinConfig")
      .def_readonly("spins", &SpinConfig::s)
      .def_readonly("energy", &SpinConfig::energy)
      .def_readonly("cut", &SpinConfig::cut);
  m.def(
      "ising_energy", [](const Eigen::MatrixXd& J, const std::vector<std::int8_t>& s) {
        return ising_energy(make_ising(J), s);
      });
  m.def("brute_force_ising", [](const Eigen::MatrixXd& J) { return brute_force_ising(make_ising(J)); });
  m.def("brute_force_maxcut", [](const WeightedGraph& g) { return brute_force_ising(maxcut_to_ising(g)); });
  m.def(
      "simulated_bifurcation",
      [](const Eigen::MatrixXd& J, double dt, std::size_t steps, std::optional<double> p_final,
         std::optional<double> xi0, std::size_t restarts, std::uint64_t seed) {
        SbParams p;
        p.dt = dt;
        p.t_steps = steps;
        p.p_final = p_final;
        p.xi0 = xi0;
        p.seed = seed;
        return sb_solve(make_ising(J), p, restarts).best.best;
      },
      py::arg("J"), py::arg("dt") = 0.05, py::arg("steps") = 2000, py::arg("p_final") = py::none(),
      py::arg("xi0") = py::none(), py::arg("restarts") = 1, py::arg("seed") = 0);
  m.def(
      "maxcut",
      [](const WeightedGraph& g, double dt, std::size_t steps, std::size_t restarts, std::uint64_t seed) {
        SbParams p;
        p.dt = dt;
        p.t_steps = steps;
        p.seed = seed;
        return sb_solve(maxcut_to_ising(g), p, restarts).best.best;
      },
      py::arg("graph"), py::arg("dt") = 0.05, py::arg("steps") = 2000, py::arg("restarts") = 1, py::arg("seed") = 0);

  // ---- ctds-sat ----
  py::class_<CnfFormula>(m, "Formula")
      .def(py::init(&formula_from_lists), py::arg("n_vars"), py::arg("clauses"))
      .def_readonly("n_vars", &CnfFormula::n_vars)
      .def_property_readonly("n_clauses", &CnfFormula::n_clauses)
      .def_property_readonly("alpha", &CnfFormula::alpha)
      .def_readonly("warnings", &CnfFormula::warnings);
  m.def("load_cnf", &load_cnf);
  m.def("evaluate_assignment", &evaluate_assignment);
  py::class_<SatOutcome>(m, "SatOutcome")
      .def_property_readonly("satisfied", [](const SatOutcome& o) { return o.status == SatStatus::Sat; })
      .def_property_readonly("status", [](const SatOutcome& o) { return o.status == SatStatus::Sat ? "SAT" : "UNKNOWN"; })
      .def_readonly("assignment", &SatOutcome::best_assignment)
      .def_readonly("best_satisfied", &SatOutcome::best_satisfied)
      .def_readonly("steps", &SatOutcome::steps)
      .def_readonly("time", &SatOutcome::time)
      .def_readonly("v_trace", &SatOutcome::v_trace)
      .def_readonly("a_rescales", &SatOutcome::a_rescales);
  m.def(
      "ctds_solve",
      [](const CnfFormula& f, double dt, double budget, std::uint64_t seed, double a_cap) {
        CtdsParams p;
        p.dt = dt;
        p.t_budget = budget;
        p.seed = seed;
        p.a_cap = a_cap;
        return ctds_solve(f, p);
      },
      py::arg("formula"), py::arg("dt") = 0.05, py::arg("budget") = 500.0, py::arg("seed") = 0,
      py::arg("a_cap") = 1e12);
  py::class_<FsleEstimate>(m, "FsleEstimate")
      .def_readonly("exponent", &FsleEstimate::exponent)
      .def_readonly("mean_rate", &FsleEstimate::mean_rate)
      .def_readonly("ci_low", &FsleEstimate::ci_low)
      .def_readonly("ci_high", &FsleEstimate::ci_high)
      .def_readonly("taus", &FsleEstimate::taus)
      .def_readonly("censored_converged", &FsleEstimate::censored_converged)
      .def_readonly("censored_satisfied", &FsleEstimate::censored_satisfied)
      .def_readonly("censored_timeout", &FsleEstimate::censored_timeout);
  m.def(
      "fsle",
      [](const CnfFormula& f, std::size_t pairs, double delta0, double delta1, double t_max, std::uint64_t seed) {
        CtdsParams p;
        p.seed = seed;
        FsleParams fp;
        fp.n_pairs = pairs;
        fp.delta0 = delta0;
        fp.delta1 = delta1;
        fp.t_max = t_max;
        return fsle_measure(f, p, fp);
      },
      py::arg("formula"), py::arg("pairs") = 20, py::arg("delta0") = 1e-6, py::arg("delta1") = 1e-2,
      py::arg("t_max") = 200.0, py::arg("seed") = 0);

  // ---- koopman-edmd ----
  m.def("uniform_points", &uniform_points, py::arg("n"), py::arg("dim"), py::arg("lo"), py::arg("hi"),
        py::arg("seed") = 0);
  m.def(
      "descent_pairs",
      [](const std::string& name, const Eigen::MatrixXd& starts, double step, std::size_t burst) {
        const auto p = gd_pairs(objective(name, static_cast<std::size_t>(starts.cols())), starts, step, burst);
        return std::make_pair(p.xs, p.ys);
      },
      py::arg("objective"), py::arg("starts"), py::arg("step"), py::arg("burst") = 1,
      "(xs, ys) for himmelblau, quadratic or double_well descent");
  m.def(
      "descent_apply",
      [](const std::string& name, const Eigen::MatrixXd& points, double step, std::size_t iterations) {
        return gd_apply(objective(name, static_cast<std::size_t>(points.cols())), points, step, iterations);
      },
      py::arg("objective"), py::arg("points"), py::arg("step"), py::arg("iterations") = 1);
  m.def("himmelblau_minima", [] {
    Eigen::MatrixXd out(4, 2);
    const auto mins = himmelblau_minima();
    for (int i = 0; i < 4; ++i) out.row(i) = mins[static_cast<std::size_t>(i)].transpose();
    return out;
  });
  py::class_<Dictionary>(m, "Dictionary")
      .def(py::init([](const Eigen::MatrixXd& data, const std::string& spec, std::size_t centers, std::uint64_t seed) {
             auto s = DictionarySpec::parse(spec, centers);
             s.seed = seed;
             return build_dictionary(s, data);
           }),
           py::arg("data"), py::arg("spec") = "default", py::arg("centers") = 50, py::arg("seed") = 0)
      .def_property_readonly("size", &Dictionary::size)
      .def_readonly("width", &Dictionary::width)
      .def_readonly("centers", &Dictionary::centers)
      .def("evaluate", &Dictionary::evaluate)
      .def("describe", &Dictionary::describe);
  py::class_<KoopmanApprox>(m, "KoopmanApprox")
      .def_readonly("K", &KoopmanApprox::K)
      .def_readonly("residual", &KoopmanApprox::residual);
  py::class_<SpectralDecomp>(m, "Spectrum")
      .def_readonly("eigenvalues", &SpectralDecomp::eigenvalues)
      .def_readonly("eigenvectors", &SpectralDecomp::eigenvectors)
      .def_readonly("modes", &SpectralDecomp::modes)
      .def_readonly("defective", &SpectralDecomp::defective)
      .def_readonly("eig_residual", &SpectralDecomp::eig_residual);
  m.def(
      "edmd_fit",
      [](const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys, const Dictionary& dict) {
        return edmd_fit(SnapshotPairs{xs, ys}, dict);
      },
      py::arg("xs"), py::arg("ys"), py::arg("dictionary"));
  m.def("spectrum", &spectrum);
  m.def("eigenfunctions", &eigenfunctions);
  m.def("predict_state", &predict_state, py::arg("approx"), py::arg("dictionary"), py::arg("x0"), py::arg("horizon"));
  m.def(
      "basin_label",
      [](const SpectralDecomp& sd, const Dictionary& dict, const Eigen::MatrixXd& points, std::size_t n_fns,
         std::optional<std::size_t> groups, std::uint64_t seed) {
        const auto bl = basin_label(sd, dict, points, n_fns, groups, seed);
        return std::make_pair(bl.labels, bl.n_groups);
      },
      py::arg("spectrum"), py::arg("dictionary"), py::arg("points"), py::arg("n_basin_fns") = 3,
      py::arg("n_groups") = py::none(), py::arg("seed") = 0, "(labels, number of groups)");

  // ---- cli ----
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "(exit code, stdout text, stderr text) of one CLI invocation");
}
