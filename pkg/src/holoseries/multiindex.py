"""Multi-index combinatorics, unsigned Stirling numbers and exact identity checks.

Multi-indices are ordered graded-lexicographically everywhere: by total order
first, then by decreasing exponent of the first coordinate, and so on, e.g.
``(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Integral, Rational

import numpy as np

MAX_ENUMERATION = 500_000


class MultiIndex(tuple):
    """Exponent vector alpha in N_0^n."""

    def __new__(cls, exponents):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in multi-index {exps}")
        return super().__new__(cls, exps)

    @property
    def order(self) -> int:
        return sum(self)

    @property
    def factorial(self) -> int:
        out = 1
        for e in self:
            out *= math.factorial(e)
        return out

    def __add__(self, other):  # componentwise, not tuple concatenation
        return MultiIndex(a + b for a, b in zip(self, other, strict=True))

    def __sub__(self, other):
        return MultiIndex(a - b for a, b in zip(self, other, strict=True))

    def __le__(self, other):
        return all(a <= b for a, b in zip(self, other, strict=True))

    def binom(self, other) -> int:
        """Multi-binomial coefficient prod_i C(self_i, other_i)."""
        out = 1
        for a, b in zip(self, other, strict=True):
            out *= math.comb(a, b)
        return out

    @classmethod
    def unit(cls, n: int, i: int) -> "MultiIndex":
        return cls(1 if j == i else 0 for j in range(n))

    @classmethod
    def zero(cls, n: int) -> "MultiIndex":
        return cls((0,) * n)

    def __repr__(self):
        return f"MultiIndex{tuple(self)}"


def _compositions(total: int, parts: int):
    """Weak compositions of ``total`` into ``parts`` parts, first part descending."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def enumerate_multiindices(n: int, d_max: int, limit: int = MAX_ENUMERATION) -> list[MultiIndex]:
    """All alpha with |alpha| <= d_max in graded-lex order."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if d_max < 0:
        raise ValueError("d_max must be >= 0")
    count = math.comb(n + d_max, n)
    if count > limit:
        raise ValueError(f"{count} multi-indices exceed the enumeration limit {limit}")
    return [MultiIndex(c) for d in range(d_max + 1) for c in _compositions(d, n)]


def basis_size(n: int, degree: int) -> int:
    """Number of multi-indices with order <= degree."""
    return math.comb(n + degree, n) if degree >= 0 else 0


@dataclass(frozen=True, eq=False)
class MultiIndexBasis:
    """Graded-lex basis of all alpha with |alpha| <= ``degree``.

    ``sub_unit[i, k]`` is the position of ``alpha_i - e_k`` (-1 if that
    exponent is zero).  Sum tables for the kernels come from ``add_table``.
    """

    n: int
    degree: int
    indices: tuple = field(repr=False)
    exps: np.ndarray = field(repr=False)
    orders: np.ndarray = field(repr=False)
    keys: np.ndarray = field(repr=False)
    lookup: np.ndarray = field(repr=False)
    sub_unit: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.indices)

    def size(self, degree: int) -> int:
        return basis_size(self.n, min(degree, self.degree))

    def index(self, alpha) -> int:
        alpha = tuple(alpha)
        if len(alpha) != self.n or sum(alpha) > self.degree or min(alpha) < 0:
            raise KeyError(alpha)
        return int(self.lookup[int(np.dot(alpha, self._radix))])

    @property
    def _radix(self) -> np.ndarray:
        return (self.degree + 1) ** np.arange(self.n, dtype=np.int64)


@lru_cache(maxsize=64)
def get_basis(n: int, degree: int) -> MultiIndexBasis:
    indices = tuple(enumerate_multiindices(n, degree))
    size = len(indices)
    exps = np.array(indices, dtype=np.int64).reshape(size, n)
    orders = exps.sum(axis=1)
    radix = (degree + 1) ** np.arange(n, dtype=np.int64)
    keys = exps @ radix
    lookup = np.full((degree + 1) ** n, -1, dtype=np.int64)
    lookup[keys] = np.arange(size)
    sub_unit = np.full((size, n), -1, dtype=np.int64)
    for k in range(n):
        ok = exps[:, k] > 0
        sub_unit[ok, k] = lookup[keys[ok] - radix[k]]
    for arr in (exps, orders, keys, lookup, sub_unit):
        arr.setflags(write=False)
    return MultiIndexBasis(n, degree, indices, exps, orders, keys, lookup, sub_unit)


@lru_cache(maxsize=64)
def _comb_table(m: int) -> np.ndarray:
    tab = np.zeros((m + 1, m + 1))
    for a in range(m + 1):
        for b in range(a + 1):
            tab[a, b] = math.comb(a, b)
    return tab


@lru_cache(maxsize=64)
def add_table(n: int, degree: int, col_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Position of alpha_i + alpha_j and binom(alpha_i + alpha_j, alpha_j).

    Rows run over the basis of order <= ``degree``, columns over order
    <= ``col_degree``; entries whose sum exceeds ``degree`` hold -1 / 0.
    """
    basis = get_basis(n, degree)
    cols = basis.size(col_degree)
    fits = basis.orders[:, None] + basis.orders[None, :cols] <= degree
    sums = basis.keys[:, None] + basis.keys[None, :cols]
    idx = np.where(fits, basis.lookup[np.where(fits, sums, 0)], -1)
    comb = _comb_table(degree)
    binom = np.ones(idx.shape)
    for k in range(n):
        a = basis.exps[:, k][:, None]
        b = basis.exps[:cols, k][None, :]
        binom *= comb[np.minimum(a + b, degree), b]
    binom[~fits] = 0.0
    idx.setflags(write=False)
    binom.setflags(write=False)
    return idx, binom


# ---------------------------------------------------------------------------
# Stirling numbers of the first kind (unsigned)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StirlingTable:
    """Rows ``c[k][r]``, 0 <= r <= k <= k_max, exact Python integers."""

    k_max: int
    rows: tuple

    def __getitem__(self, k):
        return self.rows[k]

    def as_float(self, k: int) -> np.ndarray:
        return np.array([float(c) for c in self.rows[k]])


@lru_cache(maxsize=16)
def stirling_unsigned(k_max: int) -> StirlingTable:
    """Coefficients of z(z+1)...(z+k-1) via c[k+1][j] = k c[k][j] + c[k][j-1]."""
    if k_max < 0:
        raise ValueError("k_max must be >= 0")
    rows = [(1,)]
    for k in range(k_max):
        prev = rows[-1]
        row = [0] * (k + 2)
        for j in range(1, k + 2):
            left = prev[j] if j <= k else 0
            row[j] = k * left + prev[j - 1]
        rows.append(tuple(row))
    return StirlingTable(k_max, tuple(rows))


def rising_factorial_poly(k: int, z):
    """Direct product z(z+1)...(z+k-1); used as the independent check."""
    out = 1
    for r in range(k):
        out = out * (z + r)
    return out


# ---------------------------------------------------------------------------
# Exact identities from the q-system solution
# ---------------------------------------------------------------------------


def _pow0(base: int, exp: int) -> int:
    # 0**0 == 1 in Python already; spelled out because the identity relies on it
    return 1 if exp == 0 else base**exp


def check_derivative_identity(k: int) -> bool:
    """(-1)^k sum_j C(k,j) (-1)^j j^k == k! in exact integers."""
    if k < 0:
        raise ValueError("k must be >= 0")
    total = sum(math.comb(k, j) * (-1) ** j * _pow0(j, k) for j in range(k + 1))
    return (-1) ** k * total == math.factorial(k)


def _alternating_power_sum(l: int, p: int) -> int:
    return sum(math.comb(l, j) * (-1) ** j * j**p for j in range(1, l + 1))


def check_factorial_shift_identity(k: int, x) -> float:
    """|LHS - RHS| of the shifted-factorial identity.

    LHS = x^{k+1} - (-1)^{k+1} sum_{l=1}^{k} S_l [prod_{r<l}(x+r) / l!]
    RHS = prod_{r=0}^{k} (x+r), with S_l = sum_{j=1}^{l} C(l,j)(-1)^j j^{k+1}.
    Integer or rational ``x`` is evaluated exactly.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    exact = isinstance(x, (Integral, Rational)) and not isinstance(x, bool)
    xv = Fraction(x) if exact else float(x)
    acc = xv ** (k + 1)
    sign = (-1) ** (k + 1)
    for l in range(1, k + 1):
        s_l = _alternating_power_sum(l, k + 1)
        if exact:
            term = Fraction(s_l * rising_factorial_poly(l, xv), math.factorial(l))
        else:
            term = s_l * rising_factorial_poly(l, xv) / math.factorial(l)
        acc -= sign * term
    rhs = rising_factorial_poly(k + 1, xv)
    return float(abs(acc - rhs))
