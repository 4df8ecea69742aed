import numpy as np
import pytest

from holoseries import (
    AffinityError,
    ZeroCrossingError,
    build_generator,
    cd_from_h,
    cd_path,
    h_sequence,
    log_affine_eval,
    models,
    q_series_eval,
    rho_sequence,
    solve_riccati,
)
from holoseries.polynomial import PolyInX
from holoseries.series_engine import SeriesExpansion


def test_rho_of_brownian_is_linear_in_w():
    gen = build_generator(models.brownian())
    u, eta = 1.5, 1.0
    rho = rho_sequence(h_sequence(gen, [u], eta, 30))
    # log p = iux - u^2 s/2 with s = -log(1-w)/eta: rho_k = -u^2/(2 eta k)
    for k in range(1, 31):
        assert rho.rho0[k] == pytest.approx(-u * u / (2 * eta * k), rel=1e-12)
        assert abs(rho.rho1[k][0]) < 1e-14


def test_ou_linear_part():
    gen = build_generator(models.ornstein_uhlenbeck())
    rho = rho_sequence(h_sequence(gen, [1.0], 1.0, 20))
    # D = iu e^{-s} = iu (1 - w) for eta = kappa = 1
    assert rho.rho1[1][0] == pytest.approx(-1j)
    assert np.all(np.abs(rho.rho1[2:, 0]) < 1e-13)


def test_log_affine_matches_q_series():
    gen = build_generator(models.square_root())
    h = h_sequence(gen, [2.0], 1.0, 100)
    rho = rho_sequence(h, affine_tol=None)
    for s in (0.1, 0.6, 1.5):
        for x in (0.0, 0.5, 1.0):
            assert log_affine_eval(rho, [x], s).value == pytest.approx(q_series_eval(h, 1.0, [x], s).value, abs=1e-10)


def test_extended_precision_affinity():
    gen = build_generator(models.ornstein_uhlenbeck())
    rho = rho_sequence(h_sequence(gen, [-3.0], 1.3, 20, dps=40), affine_tol=1e-20)
    assert rho.relative_residuals().max() < 1e-25


def test_non_affine_input_raises():
    u = np.array([1.0])
    one = PolyInX.constant(1, 1.0, cap=2)
    quad = PolyInX.from_terms(1, {(2,): 0.5}, cap=2)
    h = SeriesExpansion("q-series", u, 1.0, (one, quad, PolyInX.constant(1, 0.0, cap=2)))
    with pytest.raises(AffinityError):
        rho_sequence(h)
    rho = rho_sequence(h, affine_tol=None)
    assert rho.affinity_residuals[1] == pytest.approx(0.5)


def test_h0_must_be_one():
    h = SeriesExpansion("q-series", np.array([1.0]), 1.0, (PolyInX.constant(1, 2.0, cap=1),))
    with pytest.raises(ValueError):
        rho_sequence(h)


def test_cd_at_zero():
    gen = build_generator(models.ornstein_uhlenbeck())
    ex = cd_from_h(h_sequence(gen, [1.3], 1.0, 20), None, 0.0)
    assert ex.C == 0 and ex.D[0] == pytest.approx(1.3j)


def test_cd_matches_riccati_heston():
    gen = build_generator(models.heston_like_2d())
    u = [1.0, 0.5]
    s_vals = np.linspace(0, 1, 6)
    C, D, wind = cd_path(h_sequence(gen, u, 1.0, 80), 1.0, s_vals)
    sol = solve_riccati(gen, u, 1.0)
    for s, c, d in zip(s_vals, C, D):
        cr, dr = sol.at(s)
        assert abs(c - cr) < 1e-8 and np.max(np.abs(d - dr)) < 1e-8
    assert np.all(wind == 0)


def test_zero_crossing_detected():
    u = np.array([1.0])
    one = PolyInX.constant(1, 1.0, cap=1)
    minus = PolyInX.constant(1, -1.0, cap=1)
    h = SeriesExpansion("q-series", u, 1.0, (one, minus))
    with pytest.raises(ZeroCrossingError):
        cd_path(h, 1.0, [50.0])


def test_truncated_w_series_warns():
    from holoseries.series_engine import SeriesWarning

    gen = build_generator(models.brownian())
    h = h_sequence(gen, [3.0], 1.0, 150)
    with pytest.warns(SeriesWarning, match="not converged"):
        cd_path(h, 1.0, [5.0])
