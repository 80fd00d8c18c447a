import json
import os
import pathlib

import numpy as np
import pytest

import mgle

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_expm_nilpotent():
    A = np.array([[0, 2.5], [0, 0]], dtype=complex)
    assert np.allclose(mgle.expm(A), [[1, 2.5], [0, 1]], atol=1e-14)


def test_adjoint_weighted():
    W = np.diag([2.0, 1.0]).astype(complex)
    A = np.array([[0, 1], [0, 0]], dtype=complex)
    assert np.allclose(mgle.adjoint(W, A), [[0, 0], [2, 0]], atol=1e-14)


def test_volterra_exponential():
    dt = 0.01
    t = np.arange(501) * dt
    K = mgle.solve_convolution(np.ones(501), np.ones(501), dt)
    assert np.max(np.abs(K - np.exp(-t))) < 1e-4
    assert np.allclose(mgle.convolve(np.ones(501), np.ones(501), dt), t, atol=1e-12)


def test_gle_oscillator_matrix():
    L = np.array([[0, 1], [-4, 0]], dtype=complex)
    W = np.diag([4.0, 1.0]).astype(complex)
    out = mgle.gle(L, np.array([1, 0], dtype=complex), 5.0, 0.01, weight=W)
    assert abs(out["omega"]) < 1e-14
    assert np.max(np.abs(out["K"] + 4)) < 0.01
    assert out["eta"].shape == (2, 501)
    assert out["residual"]["status"] == "PASS"


def test_dyson_random():
    rng = np.random.default_rng(0)
    L = (rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))) / np.sqrt(6) - 1.5 * np.eye(6)
    z = rng.standard_normal(6) + 0j
    r = mgle.check_dyson(L, z, 2.0, 0.1)
    assert r["status"] == "PASS" and r["max_deviation"] < 1e-12


def test_oscillator_ensemble():
    out = mgle.oscillator(samples=4000, t_max=2.0)
    assert np.max(np.abs(out["K"] + 4)) < 0.08


def test_errors_are_typed():
    with pytest.raises(mgle.ConstructionError):
        mgle.gle(np.zeros((2, 2), dtype=complex), np.zeros(2, dtype=complex), 1.0, 0.1)
    with pytest.raises(mgle.ConfigError):
        mgle.run(str(CONFIGS / "missing.json"))
    with pytest.raises(mgle.Error):
        mgle.expm(np.full((2, 2), np.nan, dtype=complex))


def test_run_writes_valid_report(tmp_path):
    res = mgle.run(str(CONFIGS / "matrix8.json"), out=str(tmp_path))
    assert res["exit_code"] == 0
    assert {c["name"] for c in res["checks"]} == {"dyson", "gle_residual", "fdt2", "semigroup", "growth_bound"}
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["exit_code"] == 0
    for name in ("kernel.csv", "correlation.csv", "forces.csv", "report.txt"):
        assert (tmp_path / name).exists()
    schema_path = os.environ.get("MGLE_SCHEMA")
    if schema_path:
        jsonschema = pytest.importorskip("jsonschema")
        jsonschema.validate(report, json.loads(pathlib.Path(schema_path).read_text()))


def test_negative_control_exit_code():
    res = mgle.run(str(CONFIGS / "negative" / "zero_memory.json"))
    assert res["exit_code"] == 2
