import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoseries import GeneratorSpec, build_generator, g_sequence, models
from holoseries.generator import (
    GeneratorError,
    coefficient_bound,
    growth_profile,
    log_coefficient_bound,
    moment_tail,
    symbol_coefficients,
)


def test_brownian_coefficients():
    gen = build_generator(models.brownian())
    assert gen.coeffs.keys() == {(2,)}
    c, d = gen.coeffs[(2,)]
    assert c == 0.5 and d[0] == 0.0


def test_ou_coefficients():
    gen = build_generator(models.ornstein_uhlenbeck())
    assert gen.coeffs[(1,)][1][0] == -1.0
    assert gen.coeffs[(2,)][0] == 1.0


def test_compound_poisson_coefficients_are_moments_over_factorial():
    gen = build_generator(models.compound_poisson())
    import math

    for k in range(2, 31):
        assert gen.coeffs[(k,)][0] == pytest.approx(0.5 / math.factorial(k))


def test_zero_generator():
    gen = build_generator(models.zero_model(2))
    assert gen.is_zero()
    g = g_sequence(gen, [1.0, -1.0], 5)
    for r in range(1, 6):
        assert g[r].max_abs() == 0.0


def test_off_diagonal_diffusion_counts_once():
    gen = build_generator(models.gaussian_2d())
    spec = models.gaussian_2d()
    c, _ = gen.coeffs[(1, 1)]
    assert c == pytest.approx(spec.diff_const[0, 1])


def test_from_coeffs_validation():
    with pytest.raises(GeneratorError):
        GeneratorSpec.from_coeffs(1, {(0,): (1.0, 0.0)})
    with pytest.raises(GeneratorError):
        GeneratorSpec.from_coeffs(1, {(3,): (1.0, 0.0)}, k_max=2)
    with pytest.raises(GeneratorError):
        GeneratorSpec.from_coeffs(2, {(1,): (1.0, 0.0)})


def test_symbol_of_brownian():
    gen = build_generator(models.brownian())
    sym = symbol_coefficients(gen, [2.0])
    # A f_u / f_u = -u^2/2 for Brownian motion
    assert sym.b0[0] == pytest.approx(-2.0)


def test_moment_tail_small_for_compound_poisson():
    gen = build_generator(models.compound_poisson())
    assert moment_tail(gen, [1.0]) < 1e-20


def test_growth_bound_log_form_consistent():
    gen = build_generator(models.square_root())
    prof = growth_profile(gen)
    for r in (0, 3, 10):
        b = coefficient_bound(gen, [0.5], [1.0], r, prof)
        assert np.log(b) == pytest.approx(log_coefficient_bound(gen, [0.5], [1.0], r, prof))


@given(u=st.floats(-4, 4), x=st.floats(-1, 1))
@settings(max_examples=40, deadline=None)
def test_growth_bound_holds_property(u, x):
    gen = build_generator(models.affine_jump_1d())
    prof = growth_profile(gen)
    g = g_sequence(gen, [u], 20)
    for r in range(21):
        assert abs(g[r]([x])) <= coefficient_bound(gen, [x], [u], r, prof)
