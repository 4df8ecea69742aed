import pytest

from holoseries import BlowUpError, GeneratorSpec, build_generator, char_fn_riccati, models, solve_riccati
from holoseries.riccati_oracle import riccati_rhs, self_convergence


@pytest.mark.parametrize("u", [-2.0, 0.5, 3.0])
def test_brownian_and_ou(u):
    bm = solve_riccati(build_generator(models.brownian()), [u], 1.0)
    ou = solve_riccati(build_generator(models.ornstein_uhlenbeck()), [u], 1.0)
    for s in (0.0, 0.3, 1.0):
        assert char_fn_riccati(bm, [0.2], s) == pytest.approx(models.brownian_cf(s, 0.2, u), abs=1e-9)
        assert char_fn_riccati(ou, [0.2], s) == pytest.approx(models.ou_cf(s, 0.2, u), abs=1e-9)


def test_square_root_closed_form():
    sol = solve_riccati(build_generator(models.square_root()), [1.5], 2.0)
    for s in (0.5, 2.0):
        C, D = sol.at(s)
        Cx, Dx = models.square_root_cd(s, 1.5)
        assert abs(C - Cx) < 1e-9 and abs(D[0] - Dx) < 1e-9


def test_rhs_at_initial_point():
    gen = build_generator(models.ornstein_uhlenbeck())
    dc, dd = riccati_rhs(gen, [2j])
    assert dc == pytest.approx(-4.0) and dd[0] == pytest.approx(-2j)


def test_blow_up_detected():
    # dD/ds = -i D^2 with D(0) = i gives D = i / (1 - s)
    gen = GeneratorSpec.__new__(GeneratorSpec)
    base = GeneratorSpec.from_coeffs(1, {(2,): (0.0, 1.0)}, k_max=2)
    d = base.d.astype(complex) * -1j
    object.__setattr__(gen, "__dict__", {**base.__dict__, "d": d, "c": base.c.astype(complex)})
    sol = solve_riccati(gen, [1.0], 2.0)
    assert sol.blow_up_time is not None and 0.99 < sol.blow_up_time <= 1.0
    with pytest.raises(BlowUpError):
        sol.at(1.5)


def test_query_validation():
    sol = solve_riccati(build_generator(models.brownian()), [1.0], 1.0)
    with pytest.raises(ValueError):
        sol.at(-0.1)
    with pytest.raises(ValueError):
        sol.at(2.0)
    with pytest.raises(ValueError):
        solve_riccati(build_generator(models.brownian()), [1.0], 0.0)


def test_self_convergence_small():
    assert self_convergence(build_generator(models.square_root()), [1.0], 1.0, 1e-9) < 1e-8
