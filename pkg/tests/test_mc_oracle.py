import numpy as np
import pytest

from holoseries import _backend, mc_char_fn, models, simulate_paths
from holoseries.mc_oracle import ClampWarning, SDEModel


def test_s_zero_is_deterministic():
    t = simulate_paths(models.brownian(), [0.3], 0.0, n_paths=100)
    est = mc_char_fn(t, [1.0])
    assert est.value == pytest.approx(np.exp(0.3j))
    assert est.stderr == pytest.approx(0.0, abs=1e-15)


def test_same_seed_same_paths():
    a = simulate_paths(models.square_root(), [0.3], 0.5, n_paths=3000, dt=0.01, seed=7)
    b = simulate_paths(models.square_root(), [0.3], 0.5, n_paths=3000, dt=0.01, seed=7)
    c = simulate_paths(models.square_root(), [0.3], 0.5, n_paths=3000, dt=0.01, seed=8)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_thread_count_does_not_change_results():
    kw = dict(n_paths=5000, dt=0.02, seed=3, block=1024)
    a = simulate_paths(models.compound_poisson(), [0.3], 0.5, threads=1, **kw)
    b = simulate_paths(models.compound_poisson(), [0.3], 0.5, threads=4, **kw)
    assert np.array_equal(a.values, b.values)


@pytest.mark.skipif(not _backend.HAS_NUMBA, reason="numba not installed")
@pytest.mark.parametrize("name", ["ou", "compound_poisson", "square_root"])
def test_backends_agree(name):
    spec = models.CANONICAL[name]()
    with _backend.use_backend("numpy"):
        a = simulate_paths(spec, [0.3], 0.5, n_paths=2000, dt=0.01, seed=11)
    with _backend.use_backend("numba"):
        b = simulate_paths(spec, [0.3], 0.5, n_paths=2000, dt=0.01, seed=11)
    assert np.allclose(a.values, b.values, rtol=0, atol=1e-12)


def test_brownian_moments():
    t = simulate_paths(models.brownian(), [0.0], 1.0, n_paths=20000, dt=0.1, seed=1)
    assert abs(t.values.mean()) < 0.05
    assert abs(t.values.var() - 1.0) < 0.05


def test_mc_matches_closed_form_small():
    t = simulate_paths(models.ornstein_uhlenbeck(), [0.3], 1.0, n_paths=20000, dt=1 / 128, seed=5)
    est = mc_char_fn(t, [1.0])
    assert abs(est.value - models.ou_cf(1.0, 0.3, 1.0)) < 4 * est.stderr + 1e-3


def test_negative_control_detected():
    spec = models.ornstein_uhlenbeck()
    model = SDEModel.from_spec(spec).perturbed_drift(1.0)
    est = mc_char_fn(simulate_paths(model, [0.3], 1.0, n_paths=20000, dt=1 / 64, seed=5), [1.0])
    assert abs(est.value - models.ou_cf(1.0, 0.3, 1.0)) > 5 * est.stderr


def test_clamp_warning():
    spec = models.square_root(kappa=0.0, theta=0.0, sigma=2.0)
    with pytest.warns(ClampWarning):
        simulate_paths(spec, [0.05], 1.0, n_paths=2000, dt=0.05, seed=0)


def test_validation():
    with pytest.raises(ValueError):
        simulate_paths(models.brownian(), [0.0], -1.0)
    with pytest.raises(ValueError):
        simulate_paths(models.brownian(), [0.0], 0.1, dt=0.2)
