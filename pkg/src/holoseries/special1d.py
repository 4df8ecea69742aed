"""Closed combinatorial form of A^r f_u for 1-D models a_l(x) = (lambda0 + lambda1 x) eta_l.

Every coefficient shares the factor L(x) = lambda0 + lambda1 x, so g_r is a sum
over integer partitions weighted by the exact integers pi^{(p)}_{(n_1,m_1),...}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .generator import GeneratorSpec
from .series_engine import g_sequence


@dataclass(frozen=True)
class Special1DModel:
    lambda0: float
    lambda1: float
    drift_scale: float = 0.0
    diff_scale: float = 0.0
    jump_moments: dict = field(default_factory=dict)  # l -> int z^l mu(dz), l >= 2
    k_max: int = 20
    name: str = ""

    @property
    def eta(self) -> np.ndarray:
        """eta_0 = 0, eta_1 = drift, eta_2 = (diffusion + m_2)/2, eta_l = m_l/l!."""
        out = np.zeros(self.k_max + 1)
        if self.k_max >= 1:
            out[1] = self.drift_scale
        for l in range(2, self.k_max + 1):
            m = float(self.jump_moments.get(l, 0.0))
            out[l] = (self.diff_scale + m) / 2.0 if l == 2 else m / math.factorial(l)
        return out

    def to_generator(self, lo: float = 0.0, hi: float = 1.0) -> GeneratorSpec:
        coeffs = {(l,): (self.lambda0 * e, self.lambda1 * e) for l, e in enumerate(self.eta) if l and e}
        return GeneratorSpec.from_coeffs(1, coeffs, k_max=self.k_max, lo=[lo], hi=[hi],
                                         has_jumps=bool(self.jump_moments))

    def intensity(self, x) -> float:
        return self.lambda0 + self.lambda1 * x


def atom_moments(jump: float, k_max: int) -> dict:
    return {l: jump**l for l in range(2, k_max + 1)}


def frak_h(model: Special1DModel, u: float, r: int = 0) -> complex:
    """r-th moment-series derivative sum_l eta_{l+r} ((l+r)!/l!) (iu)^l."""
    if r < 0:
        raise ValueError("r must be >= 0")
    eta = model.eta
    total = 0j
    for l in range(0, len(eta) - r):
        total += eta[l + r] * (math.factorial(l + r) / math.factorial(l)) * (1j * u) ** l
    return total


# ---------------------------------------------------------------------------
# Integer coefficients pi
# ---------------------------------------------------------------------------


def canonical_pairs(pairs) -> tuple:
    """Drop m = 0 pairs and sort by n; n values must be distinct."""
    kept = tuple(sorted((int(n), int(m)) for n, m in pairs if m != 0))
    ns = [n for n, _ in kept]
    if len(set(ns)) != len(ns):
        raise ValueError(f"part sizes must be distinct: {pairs}")
    if any(n <= 0 or m < 0 for n, m in kept):
        raise ValueError(f"need n > 0 and m >= 0: {pairs}")
    return kept


@lru_cache(maxsize=None)
def _pi(p: int, pairs: tuple) -> int:
    if not pairs:
        return 1
    if p == 0:
        return 0
    total = _pi(p - 1, pairs)
    for j, (n, m) in enumerate(pairs):
        reduced = pairs[:j] + ((n, m - 1),) + pairs[j + 1:]
        total += math.comb(p + n - 1, n) * _pi(p + n - 1, canonical_pairs(reduced))
    return total


def pi_value(p: int, pairs=()) -> int:
    if p < 0:
        raise ValueError("p must be >= 0")
    return _pi(p, canonical_pairs(pairs))


def integer_partitions(total: int, max_part: int | None = None):
    """Partitions of ``total`` as non-increasing tuples."""
    max_part = total if max_part is None else max_part
    if total == 0:
        yield ()
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in integer_partitions(total - first, first):
            yield (first,) + rest


def gr_partitions(r: int) -> list:
    """All (p, ((n_1,m_1),...)) with p >= 1, distinct n_j >= 1, m_j >= 1 and p + sum n_j m_j = r."""
    out = []
    for p in range(r, 0, -1):
        for part in integer_partitions(r - p):
            counts: dict = {}
            for n in part:
                counts[n] = counts.get(n, 0) + 1
            out.append((p, tuple(sorted(counts.items()))))
    return out


def brute_force_partition_count(r: int) -> int:
    """Count via compositions of r - p, deduplicated after sorting; independent of gr_partitions."""
    total = 0
    for p in range(1, r + 1):
        rest = r - p
        seen = set()

        def walk(left, prefix):
            if left == 0:
                seen.add(tuple(sorted(prefix)))
                return
            for part in range(1, left + 1):
                walk(left - part, prefix + [part])

        walk(rest, [])
        total += len(seen)
    return total


@dataclass(frozen=True)
class PiTable:
    r_max: int
    entries: dict  # (p, pairs) -> int
    normalization_mode: str = "as-printed"
    corrections: dict = field(default_factory=dict)  # r -> fitted factor (calibrated mode)

    def __getitem__(self, key) -> int:
        p, pairs = key
        key = (p, canonical_pairs(pairs))
        return self.entries[key] if key in self.entries else pi_value(p, pairs)

    def factor(self, r: int) -> float:
        if self.normalization_mode == "calibrated":
            return self.corrections[r]
        return 1.0

    def calibration_report(self) -> str:
        lines = [f"normalization mode: {self.normalization_mode}"]
        for r in sorted(self.corrections):
            lines.append(f"r={r}: fitted factor {self.corrections[r]:.12g} (r! = {math.factorial(r)})")
        return "\n".join(lines)


def _as_printed_sum(model: Special1DModel, u: float, x: float, r: int) -> complex:
    L = model.lambda0 + model.lambda1 * x
    hs = [frak_h(model, u, k) for k in range(r + 1)]
    total = 0j
    for p, pairs in gr_partitions(r):
        term = pi_value(p, pairs) * model.lambda1 ** (r - p) * L**p * hs[0] ** p
        for n, m in pairs:
            term *= (hs[0] ** (n - 1) * hs[n]) ** m
        total += term
    return total / math.factorial(r)


REFERENCE_MODEL = Special1DModel(0.7, 0.4, drift_scale=0.3, diff_scale=0.5,
                                 jump_moments=atom_moments(0.8, 20), name="reference")


def pi_table(r_max: int, mode: str = "as-printed", reference: Special1DModel | None = None,
             samples: int = 6, seed: int = 0) -> PiTable:
    """All pi entries with p + sum n m <= r_max; calibrated mode fits one factor per order r."""
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    if mode not in ("as-printed", "calibrated"):
        raise ValueError(f"unknown normalization mode {mode!r}")
    entries = {}
    for r in range(1, r_max + 1):
        for p, pairs in gr_partitions(r):
            entries[(p, pairs)] = _pi(p, pairs)
    corrections = {}
    if mode == "calibrated":
        ref = reference or REFERENCE_MODEL
        gen = ref.to_generator()
        rng = np.random.default_rng(seed)
        us = rng.uniform(-2.0, 2.0, samples)
        xs = rng.uniform(0.0, 1.0, samples)
        gseqs = [g_sequence(gen, [u], r_max) for u in us]
        for r in range(1, r_max + 1):
            a = np.array([_as_printed_sum(ref, u, x, r) for u, x in zip(us, xs)])
            b = np.array([g[r]([x]) for g, x in zip(gseqs, xs)])
            corrections[r] = float(np.real(np.vdot(a, b) / np.vdot(a, a)))
    return PiTable(r_max, entries, mode, corrections)


def g_r_explicit(model: Special1DModel, u: float, x: float, r: int, table: PiTable | None = None) -> complex:
    """Partition-sum value of g_r(x, u); as printed unless the table is calibrated."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if table is not None and r > table.r_max:
        raise ValueError(f"table covers r <= {table.r_max}")
    factor = table.factor(r) if table is not None else 1.0
    return factor * _as_printed_sum(model, u, x, r)
