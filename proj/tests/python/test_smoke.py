"""Smoke tests for the _qtdsim extension module."""

import json
import math
import os

import numpy as np
import pytest

qtd = pytest.importorskip("_qtdsim")


def test_partial_trace_bell_state():
    bell = np.zeros(4, dtype=complex)
    bell[0] = bell[3] = 1.0 / math.sqrt(2.0)
    proj = np.outer(bell, bell.conj())
    dims = qtd.HilbertDims(2, 2)
    reduced = qtd.partial_trace(proj, 2, dims)
    assert np.allclose(reduced, 0.5 * np.eye(2), atol=1e-12)


def test_embeddings_commute():
    dims = qtd.HilbertDims(2, 3)
    a = qtd.HermitianOp(np.diag([1.0, -1.0]).astype(complex))
    b = qtd.HermitianOp(np.diag([0.3, 0.1, -0.4]).astype(complex))
    left = qtd.embed_left(a, dims).matrix
    right = qtd.embed_right(b, dims).matrix
    assert np.allclose(qtd.commutator(left, right), 0.0, atol=1e-14)


def test_entropy_of_maximally_mixed():
    rho = qtd.microcanonical(4)
    assert qtd.shannon_entropy(rho) == pytest.approx(math.log(4.0), abs=1e-12)


def test_canonical_commutes_and_extracts_temperature():
    rng = np.random.default_rng(7)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = 0.5 * (g + g.conj().T)
    rho = qtd.canonical(h, 1.3)
    assert np.allclose(qtd.commutator(h, rho.matrix), 0.0, atol=1e-12)

    ro_ex = h - np.trace(h) / 4.0 * np.eye(4)  # traceless, heat-coupled
    theta, inverse, positive = qtd.contact_temperature(rho, h, ro_ex)
    assert positive
    assert theta == pytest.approx(1.3, abs=1e-9)


def test_separation_propagator_is_heat_silent():
    rng = np.random.default_rng(11)
    g = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    h = 0.5 * (g + g.conj().T)
    w = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    raw = w @ w.conj().T
    raw = 0.9 * raw / np.trace(raw).real + 0.1 * np.eye(3) / 3.0
    rho = qtd.DensityOperator.make(raw)
    ro = qtd.separation_propagator(h, rho)
    assert abs(np.trace(h @ ro.matrix).real) < 1e-10
    assert qtd.entropy_rate(ro, rho) >= -1e-10


def test_evolve_preserves_canonical_state():
    h = np.diag([0.0, 1.0]).astype(complex)
    rho = qtd.canonical(h, 1.0)
    times, states, final = qtd.evolve_constant(rho, h, qtd.Propagator.zero(2), 0.5, 1e-3)
    assert times[0] == 0.0
    assert np.allclose(final.matrix, rho.matrix, atol=1e-9)


def test_package_wrapper_reexports():
    qtdsim = pytest.importorskip("qtdsim")
    assert qtdsim.shannon_entropy(qtdsim.microcanonical(3)) == pytest.approx(math.log(3.0))
    assert hasattr(qtdsim, "scenario")


def test_scenario_run(tmp_path):
    scenario_dir = os.environ.get("QTDSIM_SCENARIOS")
    if not scenario_dir:
        pytest.skip("QTDSIM_SCENARIOS not set")
    config = os.path.join(scenario_dir, "free_evolution.json")
    ok, errors = qtd.scenario.validate_file(config)
    assert ok, errors
    report = qtd.scenario.run_file(config, str(tmp_path))
    assert report["ok"], report["error"]
    csv_path = report["csv_path"]
    with open(csv_path) as fh:
        header = fh.readline()
    assert header.startswith("t,E,")
    with open(report["report_path"]) as fh:
        rep = json.load(fh)
    assert rep["schema"] == "qtdsim-report/1"
