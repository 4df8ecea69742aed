import math

import pytest

from holoseries import g_sequence
from holoseries.special1d import (
    REFERENCE_MODEL,
    Special1DModel,
    atom_moments,
    brute_force_partition_count,
    canonical_pairs,
    frak_h,
    g_r_explicit,
    gr_partitions,
    pi_table,
    pi_value,
)


def test_pi_base_cases():
    assert pi_value(0) == 1
    assert pi_value(5) == 1
    assert pi_value(0, [(1, 1)]) == 0


def test_pi_small_values():
    # pi^{(1)}_{(1,1)} = pi^{(0)}_{(1,1)} + C(1,1) pi^{(1)} = 0 + 1
    assert pi_value(1, [(1, 1)]) == 1
    assert pi_value(2, [(1, 1)]) == pi_value(1, [(1, 1)]) + math.comb(2, 1) * pi_value(2)


def test_pi_ignores_zero_multiplicities():
    assert pi_value(3, [(1, 1), (2, 0)]) == pi_value(3, [(1, 1)])


def test_canonical_pairs_validation():
    with pytest.raises(ValueError):
        canonical_pairs([(1, 1), (1, 2)])
    with pytest.raises(ValueError):
        canonical_pairs([(0, 1)])


@pytest.mark.parametrize("r", range(1, 11))
def test_partition_count_matches_brute_force(r):
    assert len(gr_partitions(r)) == brute_force_partition_count(r)


def test_partitions_sum_to_r():
    for p, pairs in gr_partitions(7):
        assert p + sum(n * m for n, m in pairs) == 7


def test_frak_h_zero_is_symbol():
    m = REFERENCE_MODEL
    u = 0.8
    eta = m.eta
    direct = sum(eta[l] * (1j * u) ** l for l in range(len(eta)))
    assert frak_h(m, u) == pytest.approx(direct)


def test_as_printed_differs_by_factorial():
    table = pi_table(4, "as-printed")
    gen = REFERENCE_MODEL.to_generator()
    g = g_sequence(gen, [1.0], 4)
    for r in range(1, 5):
        printed = g_r_explicit(REFERENCE_MODEL, 1.0, 0.4, r, table)
        assert printed * math.factorial(r) == pytest.approx(g[r]([0.4]), rel=1e-10)


def test_calibrated_table_matches_recursion():
    table = pi_table(6, "calibrated")
    model = Special1DModel(0.3, 0.6, drift_scale=-0.2, diff_scale=0.3, jump_moments=atom_moments(-0.5, 20))
    g = g_sequence(model.to_generator(), [1.3], 6)
    for r in range(1, 7):
        assert g_r_explicit(model, 1.3, 0.7, r, table) == pytest.approx(g[r]([0.7]), rel=1e-9)
    assert "r! = 2" in table.calibration_report()


def test_table_lookup_handles_zero_entries():
    table = pi_table(3)
    assert table[(0, ((1, 1),))] == 0
    assert table[(2, ((1, 1),))] == pi_value(2, [(1, 1)])


def test_r_validation():
    with pytest.raises(ValueError):
        g_r_explicit(REFERENCE_MODEL, 1.0, 0.0, 0)
    with pytest.raises(ValueError):
        g_r_explicit(REFERENCE_MODEL, 1.0, 0.0, 5, pi_table(3))
    with pytest.raises(ValueError):
        pi_table(3, mode="bogus")
