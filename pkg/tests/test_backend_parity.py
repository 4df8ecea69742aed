import numpy as np
import pytest

from holoseries import _backend, _kernels, build_generator, g_sequence, h_sequence, models
from holoseries.multiindex import add_table, basis_size
from holoseries.polynomial import PolyInX

pytestmark = pytest.mark.skipif(not _backend.HAS_NUMBA, reason="numba not installed")


@pytest.mark.parametrize("factory", [models.ornstein_uhlenbeck, models.compound_poisson,
                                     models.gaussian_2d, models.heston_like_2d])
def test_sequences_identical_across_backends(factory):
    gen = build_generator(factory())
    u = [0.7] * gen.n
    with _backend.use_backend("numpy"):
        g0, h0 = g_sequence(gen, u, 15), h_sequence(gen, u, 1.0, 15)
    with _backend.use_backend("numba"):
        g1, h1 = g_sequence(gen, u, 15), h_sequence(gen, u, 1.0, 15)
    for a, b in ((g0.matrix, g1.matrix), (h0.matrix, h1.matrix)):
        # later coefficients come out of cancellation among earlier, larger ones
        scale = np.maximum.accumulate(np.abs(a).max(axis=1))[:, None]
        assert np.all(np.abs(a - b) <= 1e-13 * scale)


def test_poly_mul_parity():
    rng = np.random.default_rng(0)
    n, deg = 2, 6
    size = basis_size(n, deg)
    a = rng.normal(size=size) + 1j * rng.normal(size=size)
    b = rng.normal(size=size) + 1j * rng.normal(size=size)
    idx, _ = add_table(n, deg, deg)
    x = _kernels._poly_mul_numpy(a, b, idx, size)
    y = _kernels._poly_mul_numba(a, b, idx, size)
    assert np.allclose(x, y, rtol=1e-14, atol=1e-14)


def test_poly_mul_matches_pointwise_product():
    rng = np.random.default_rng(1)
    a = PolyInX(2, rng.normal(size=basis_size(2, 3)) + 0j)
    b = PolyInX(2, rng.normal(size=basis_size(2, 3)) + 0j)
    pt = np.array([0.3, -0.8])
    assert (a * b)(pt) == pytest.approx(a(pt) * b(pt))


def test_backend_switch():
    before = _backend.active()
    with _backend.use_backend("numpy"):
        assert _backend.active() == "numpy"
    assert _backend.active() == before
    with pytest.raises(ValueError):
        _backend.set_backend("fortran")
