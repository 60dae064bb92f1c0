"""Smoke tests for the python surface of the _speckle extension."""

import math

import numpy as np
import pytest

import speckle


def test_correlation_model_closed_forms():
    model = speckle.CorrelationModel(dimension=1, amplitude=1.0, corr_length=1.0)
    assert model.eval_R([0.0]) == 1.0
    assert model.eval_R([0.7]) == model.eval_R([-0.7])
    assert model.eval_Rhat([0.0]) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    d = speckle.diffusion_matrix(model)
    assert d.shape == (1, 1)
    assert d[0, 0] == pytest.approx(1.0, abs=1e-7)


def test_mode_weights_sum_to_r0():
    model = speckle.CorrelationModel()
    grid = speckle.GridSpec(modes_per_dim=256, box_length=40.0, epsilon=0.5)
    mw = speckle.mode_weights(model, grid)
    assert mw["discrete_R0"] == pytest.approx(1.0, rel=0.01)
    assert not mw["aliasing_warning"]


def test_trajectory_unitary_and_deterministic():
    model = speckle.CorrelationModel()
    grid = speckle.GridSpec(modes_per_dim=128, box_length=40.0, epsilon=0.5,
                            horizon=0.1)
    kwargs = dict(eta_modes=[-1, 0, 1], times=[0.05, 0.1], base_seed=7, replica=3)
    a = speckle.run_trajectory(grid, model, **kwargs)
    b = speckle.run_trajectory(grid, model, **kwargs)
    c = speckle.run_trajectory(grid, model, base_seed=7, replica=4,
                               eta_modes=[-1, 0, 1], times=[0.05, 0.1])
    assert a["max_norm_drift"] <= 1e-10
    assert a["q_bound_violations"] == 0
    np.testing.assert_array_equal(a["X"], b["X"])
    assert not np.array_equal(a["X"], c["X"])
    # Q is nondecreasing along the trajectory
    assert a["Q"][1] >= a["Q"][0] >= 0.0


def test_kinetic_routes_agree():
    model = speckle.CorrelationModel()
    mc, mc_se = speckle.wtilde_mc(model, t=1.0, xi=[0.0], samples=20000, seed=5)
    series, se, tail = speckle.wtilde_series(model, t=1.0, xi=[0.0], samples=20000,
                                             seed=6)
    assert mc == pytest.approx(series, abs=3 * math.hypot(mc_se, se) + tail)
    grid = speckle.wtilde_grid(model, times=[1.0], xi_set=[[0.0]],
                               modes_per_dim=256, dt=0.01)
    assert grid["values"][0][0] == pytest.approx(series, abs=3 * se + 0.002)
    assert grid["mass_drift"] < 1e-6


def test_sigma_sq_and_intensity_gate():
    model = speckle.CorrelationModel()
    w, se, _ = speckle.wtilde_series(model, t=1.0, xi=[0.0], samples=20000, seed=8)
    s2 = speckle.sigma_sq(model, t=1.0, xi=[0.0], wtilde=w, werr=se)
    assert s2 > 0.0
    rng = np.random.default_rng(11)
    z = math.sqrt(s2) * (rng.standard_normal(4000) + 1j * rng.standard_normal(4000))
    ok, stat, thr = speckle.intensity_exponential_pass(list(z), s2)
    assert ok and stat < thr


def test_ou_sampler_mean():
    model = speckle.CorrelationModel()
    res = speckle.sample_ou_paths(model, xi=[0.0], etas=[0.0], times=[1.0],
                                  replicas=1500, seed=3, samples=4000)
    x = res["X"][:, 0, 0]
    want = math.exp(-0.5)
    se = x.std() / math.sqrt(len(x))
    assert abs(x.mean() - want) < 4 * se + 0.01


def test_cli_pipeline_runs(tmp_path):
    cfg = (
        "dimension=1\ngrid.N=128\ngrid.T=0.2\neps=0.5\nreplicas=3\nseed=5\n"
        "probe.xi_mode=0\nprobe.eta_modes=-1,0,1\nprobe.times=0.1,0.2\n"
    )
    out = str(tmp_path / "run")
    assert speckle.run_command("simulate", cfg, out) == 0
    assert (tmp_path / "run" / "probes_eps0.5.csv").exists()
    assert (tmp_path / "run" / "manifest_simulate.json").exists()
