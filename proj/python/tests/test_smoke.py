import math

import numpy as np
import pytest

import sashpcfe


def test_benchmark_names():
    assert set(sashpcfe.benchmark_names()) >= {"sobol-m10", "composite-beam", "truss-25"}


def test_reliability_index_round_trip():
    assert sashpcfe.reliability_index(0.0177) == pytest.approx(2.103752983766595, abs=1e-9)
    assert sashpcfe.failure_probability(sashpcfe.reliability_index(1e-3)) == pytest.approx(1e-3, rel=1e-12)
    assert math.isinf(sashpcfe.reliability_index(0.0))


def test_sobol_points_shape_and_range():
    p = sashpcfe.sobol_points(64, 3)
    assert p.shape == (64, 3)
    assert np.all((p >= 0.0) & (p < 1.0))
    assert np.allclose(p[0], [0.5, 0.5, 0.5])


def test_fd_cost():
    assert sashpcfe.fd_cost(10, 80) == 80 * 11


def test_limit_state_beam_rejects_wrong_width():
    with pytest.raises(sashpcfe.DimensionMismatch):
        sashpcfe.limit_state("composite-beam", np.zeros((2, 3)))


def test_unknown_benchmark():
    with pytest.raises(sashpcfe.ConfigError):
        sashpcfe.mcs("sobol-m7", 10)


def test_mcs_sobol_matches_cli_value():
    r = sashpcfe.mcs("sobol-m10", 100000, 20240601)
    assert r["method"] == "mcs"
    assert r["pf"] == pytest.approx(0.01825, abs=1e-12)
    assert r["n_model_evals"] == 100000


def test_fit_spce_recovers_linear():
    rng = np.random.default_rng(3)
    xi = rng.uniform(-1.0, 1.0, size=(60, 2))
    y = 1.0 + 2.0 * xi[:, 0] - 0.5 * xi[:, 1]
    model = sashpcfe.fit_spce(xi, y, 2)
    test = rng.uniform(-1.0, 1.0, size=(10, 2))
    assert np.allclose(model.predict(test), 1.0 + 2.0 * test[:, 0] - 0.5 * test[:, 1], atol=1e-8)
    assert np.allclose(model.gradient(np.zeros(2)), [2.0, -0.5], atol=1e-8)


def test_fit_hpcfe_interpolates():
    z = np.linspace(-1.0, 1.0, 12).reshape(-1, 1)
    y = np.sin(3.0 * z[:, 0])
    model = sashpcfe.fit_hpcfe(z, y, 1, 3)
    assert np.allclose(model.predict_mean(z), y, atol=1e-4)
    assert np.all(model.predict_variance(z) >= 0.0)
