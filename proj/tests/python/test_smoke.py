import json
import os
from pathlib import Path

import numpy as np
import pytest

import dynopt

FIXTURES = Path(os.environ.get("DYNOPT_FIXTURE_DIR", Path(__file__).resolve().parents[1] / "fixtures"))


def test_wave_cluster_two_triangles():
    g = dynopt.load_graph(FIXTURES / "two_triangles.el", "edge-list")
    assert len(g) == 6
    res = dynopt.wave_cluster(g, k=1, seed=7)
    ref = dynopt.spectral_reference(g, 1)
    assert dynopt.label_agreement(res.labels, ref.labels) == 1.0
    assert res.labels[0] == res.labels[2] != res.labels[3] == res.labels[5]


def test_graph_validation_raises():
    with pytest.raises(dynopt.ValidationError):
        dynopt.Graph(3, [(0, 1, -1.0)])
    with pytest.raises(dynopt.IoError):
        dynopt.load_graph(FIXTURES / "missing.el")


def test_trace_identity_and_flow_demo():
    D = dynopt.load_tsplib(FIXTURES / "flow10.tsp")
    B = dynopt.cycle_adjacency(len(D))
    order = list(range(len(D)))
    P = dynopt.permutation_matrix(order)
    assert dynopt.trace_cost(D.d, B, P) == pytest.approx(2 * dynopt.tour_cost(D, order), abs=1e-9)
    best = dynopt.brute_force_tsp(D)
    assert dynopt.flow_tour(D).cost == pytest.approx(best.cost)
    sol = dynopt.procrustes(dynopt.flow_cost_matrix(D), B)
    assert np.allclose(sol["P"].T @ sol["P"], np.eye(len(D)), atol=1e-10)


def test_maxcut_k4():
    g = dynopt.load_graph(FIXTURES / "k4.rudy", "rudy")
    cfg = dynopt.maxcut(g, restarts=10, seed=3)
    assert cfg.cut == 4.0
    assert dynopt.brute_force_maxcut(g).cut == 4.0


def test_ising_energy_matches_brute_force():
    rng = np.random.default_rng(0)
    J = rng.normal(size=(6, 6))
    J = (J + J.T) / 2
    np.fill_diagonal(J, 0.0)
    gs = dynopt.brute_force_ising(J)
    assert dynopt.ising_energy(J, gs.spins) == pytest.approx(gs.energy)
    sb = dynopt.simulated_bifurcation(J, restarts=5)
    assert sb.energy >= gs.energy - 1e-12


def test_ctds_sat_and_unsat():
    f = dynopt.Formula(3, [[1, 2], [-1, 3], [-2, -3]])
    out = dynopt.ctds_solve(f, seed=1)
    assert out.status == "SAT"
    assert dynopt.evaluate_assignment(f, out.assignment) == 3
    pair = dynopt.load_cnf(FIXTURES / "unsat_pair.cnf")
    res = dynopt.ctds_solve(pair, budget=100)
    assert not res.satisfied
    assert res.best_satisfied == 1


def test_koopman_linear_map_exact():
    xs = dynopt.uniform_points(100, 2, -1, 1, seed=3)
    M = np.array([[0.5, 0.1], [0.0, 0.8]])
    ys = xs @ M.T
    d = dynopt.Dictionary(xs, "linear")
    fit = dynopt.edmd_fit(xs, ys, d)
    eig = np.sort(np.abs(dynopt.spectrum(fit).eigenvalues))
    assert np.allclose(eig, [0.5, 0.8, 1.0], atol=1e-10)
    pred = dynopt.predict_state(fit, d, np.array([1.0, 1.0]), 3)
    assert np.allclose(pred[3], np.linalg.matrix_power(M, 3) @ np.ones(2), atol=1e-10)


def test_koopman_himmelblau_basins():
    xs = dynopt.uniform_points(2000, 2, -5, 5, seed=1)
    d = dynopt.Dictionary(xs)
    bx, by = dynopt.descent_pairs("himmelblau", xs, 1e-3, 100)
    sd = dynopt.spectrum(dynopt.edmd_fit(bx, by, d))
    labels, groups = dynopt.basin_label(sd, d, dynopt.uniform_points(300, 2, -5, 5, seed=2))
    assert groups == 4
    assert len(labels) == 300


def test_cli_report_roundtrip():
    code, out, err = dynopt.run_cli(["cluster", "--graph", str(FIXTURES / "two_triangles.el"), "--seed", "7"])
    assert code == 0
    report = json.loads(out)
    assert report["schema_version"] == 1
    assert report["oracle"]["agreement"] == 1.0
    assert "cluster:" in err
    assert dynopt.run_cli(["cluster", "--nope"])[0] == 64
