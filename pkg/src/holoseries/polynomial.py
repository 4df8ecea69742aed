"""Dense-backed polynomials in x with complex coefficients."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .generator import monomials
from .multiindex import MultiIndex, add_table, basis_size, get_basis

PRUNE_TOL = 0.0


@dataclass(frozen=True, eq=False)
class PolyInX:
    """sum_gamma coeffs[gamma] x^gamma over the graded-lex basis of order <= ``cap``.

    Coefficients are complex128, or an object array of mpmath numbers when a
    recursion runs in extended precision.
    """

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.dtype != object:
            c = c.astype(np.complex128)
        deg = 0
        while basis_size(self.n, deg) < len(c):
            deg += 1
        if basis_size(self.n, deg) != len(c):
            raise ValueError(f"{len(c)} coefficients do not fill a basis in dimension {self.n}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "_cap", deg)

    @classmethod
    def constant(cls, n: int, value=1.0, cap: int = 0) -> "PolyInX":
        c = np.zeros(basis_size(n, cap), dtype=np.complex128)
        c[0] = value
        return cls(n, c)

    @classmethod
    def from_terms(cls, n: int, terms: dict, cap: int | None = None) -> "PolyInX":
        deg = max((sum(a) for a in terms), default=0)
        cap = deg if cap is None else max(cap, deg)
        basis = get_basis(n, cap)
        c = np.zeros(len(basis), dtype=np.complex128)
        for alpha, v in terms.items():
            c[basis.index(alpha)] += v
        return cls(n, c)

    @property
    def cap(self) -> int:
        """Order of the storage basis (an upper bound on the degree)."""
        return self._cap

    @property
    def basis(self):
        return get_basis(self.n, self._cap)

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.abs_coeffs() > PRUNE_TOL)
        return int(self.basis.orders[nz[-1]]) if len(nz) else 0

    def terms(self, prune: float = PRUNE_TOL) -> dict:
        return {
            self.basis.indices[i]: complex(self.coeffs[i])
            for i in np.flatnonzero(self.abs_coeffs() > prune)
        }

    def coeff(self, alpha) -> complex:
        alpha = MultiIndex(alpha)
        if alpha.order > self._cap:
            return 0j
        return complex(self.coeffs[self.basis.index(alpha)])

    def part(self, order: int) -> np.ndarray:
        """Coefficients of the homogeneous component of the given order."""
        return self.coeffs[self.basis.orders == order]

    def resized(self, cap: int) -> "PolyInX":
        size = basis_size(self.n, cap)
        c = np.zeros(size, dtype=self.coeffs.dtype)
        m = min(size, len(self.coeffs))
        c[:m] = self.coeffs[:m]
        return PolyInX(self.n, c)

    def __call__(self, x):
        """Evaluate at a point (n,) or at a batch of points (m, n)."""
        return monomials(x, self.basis.exps) @ self.as_double().coeffs

    def _aligned(self, other: "PolyInX"):
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        cap = max(self._cap, other._cap)
        return self.resized(cap).coeffs, other.resized(cap).coeffs

    def __add__(self, other: "PolyInX") -> "PolyInX":
        a, b = self._aligned(other)
        return PolyInX(self.n, a + b)

    def __sub__(self, other: "PolyInX") -> "PolyInX":
        a, b = self._aligned(other)
        return PolyInX(self.n, a - b)

    def __neg__(self):
        return PolyInX(self.n, -self.coeffs)

    def scale(self, factor) -> "PolyInX":
        return PolyInX(self.n, self.coeffs * factor)

    def mul(self, other: "PolyInX", cap: int | None = None) -> "PolyInX":
        """Product truncated to order ``cap`` (default: exact)."""
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        cap = self._cap + other._cap if cap is None else cap
        full = max(cap, self._cap, other._cap)
        idx, _ = add_table(self.n, full, full)
        a = self.resized(full).coeffs
        b = other.resized(full).coeffs
        if a.dtype == object or b.dtype == object:
            # extended precision is slow per operation: multiply exact nonzeros only
            ia = np.flatnonzero(a != 0)
            ib = np.flatnonzero(b != 0)
            out = _kernels._poly_mul_numpy(a[ia].astype(object), b[ib].astype(object),
                                           idx[np.ix_(ia, ib)], basis_size(self.n, cap))
            return PolyInX(self.n, out)
        out = _kernels.poly_mul(np.ascontiguousarray(a), np.ascontiguousarray(b), idx,
                                basis_size(self.n, cap))
        return PolyInX(self.n, out)

    def __mul__(self, other):
        if isinstance(other, PolyInX):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    @property
    def extended(self) -> bool:
        return self.coeffs.dtype == object

    def as_double(self) -> "PolyInX":
        if not self.extended:
            return self
        return PolyInX(self.n, np.array([complex(v) for v in self.coeffs]))

    def abs_coeffs(self) -> np.ndarray:
        return np.array([float(abs(v)) for v in self.coeffs]) if self.extended else np.abs(self.coeffs)

    def max_abs(self) -> float:
        return float(np.max(self.abs_coeffs())) if len(self.coeffs) else 0.0

    def allclose(self, other: "PolyInX", atol: float = 0.0, rtol: float = 0.0) -> bool:
        a, b = self._aligned(other)
        return bool(np.all(np.abs(a - b) <= atol + rtol * np.abs(b)))

    def __repr__(self):
        body = ", ".join(f"{tuple(k)}: {v:.6g}" for k, v in self.terms().items())
        return f"PolyInX(n={self.n}, {{{body}}})"
