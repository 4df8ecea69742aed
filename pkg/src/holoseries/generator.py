"""Affine generators A = sum_alpha a_alpha(x) d^alpha with a_alpha(x) = c_alpha + x . d_alpha.

Also the symbol coefficients b^0_beta(u), b^1_{beta,kappa}(u), the growth
profile theta(v) and the a-priori bound on |A^r f_u(x)|.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .modelspec import ModelSpec, ModelSpecError
from .multiindex import MultiIndex, add_table, get_basis

DEFAULT_TAIL_TOL = 1e-10


class GeneratorError(ValueError):
    pass


class MomentTruncationWarning(UserWarning):
    """The truncated moment series may not have converged at the requested u."""


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """Affine coefficient family up to order ``k_max`` on the box [lo, hi].

    ``c`` and ``d`` are dense over the graded-lex basis of order <= ``order``
    (the highest order carrying a nonzero coefficient); entry 0 is always zero.
    """

    n: int
    k_max: int
    c: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)
    lo: np.ndarray = field(repr=False)
    hi: np.ndarray = field(repr=False)
    has_jumps: bool = False
    model: ModelSpec | None = field(default=None, repr=False)

    @property
    def order(self) -> int:
        return get_basis_order(self.n, len(self.c))

    @property
    def basis(self):
        return get_basis(self.n, self.order)

    @property
    def coeffs(self) -> dict:
        """Sparse view alpha -> (c_alpha, d_alpha) of the nonzero entries."""
        out = {}
        for i, alpha in enumerate(self.basis.indices):
            if self.c[i] != 0.0 or np.any(self.d[i] != 0.0):
                out[alpha] = (float(self.c[i]), self.d[i].copy())
        return out

    def is_zero(self) -> bool:
        return not np.any(self.c) and not np.any(self.d)

    def coefficient_at(self, alpha, x) -> float:
        i = self.basis.index(alpha)
        return float(self.c[i] + np.dot(self.d[i], x))

    def box_vertices(self) -> np.ndarray:
        grids = np.meshgrid(*[(l, h) for l, h in zip(self.lo, self.hi)], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def box_max_norm(self) -> float:
        return float(max(np.max(np.abs(self.lo)), np.max(np.abs(self.hi))))

    @classmethod
    def from_coeffs(cls, n: int, coeffs: dict, k_max: int | None = None, lo=None, hi=None,
                    has_jumps: bool = False, model: ModelSpec | None = None) -> "GeneratorSpec":
        """Build from ``{alpha: (c, d)}``; ``d`` may be a scalar when n == 1."""
        clean = {}
        for alpha, (cv, dv) in coeffs.items():
            alpha = MultiIndex(alpha)
            if len(alpha) != n:
                raise GeneratorError(f"multi-index {tuple(alpha)} has wrong length for n={n}")
            if alpha.order == 0:
                raise GeneratorError("a_0 must be zero (no entry for |alpha| = 0)")
            dv = np.broadcast_to(np.asarray(dv, dtype=float), (n,)).copy()
            clean[alpha] = (float(cv), dv)
        top = max((a.order for a, (cv, dv) in clean.items() if cv != 0 or np.any(dv)), default=1)
        if k_max is None:
            k_max = top
        if top > k_max:
            raise GeneratorError(f"coefficient of order {top} exceeds k_max={k_max}")
        basis = get_basis(n, top)
        c = np.zeros(len(basis))
        d = np.zeros((len(basis), n))
        for alpha, (cv, dv) in clean.items():
            if alpha.order <= top:
                c[basis.index(alpha)] = cv
                d[basis.index(alpha)] = dv
        lo = np.full(n, -1.0) if lo is None else np.asarray(lo, dtype=float).reshape(n)
        hi = np.full(n, 1.0) if hi is None else np.asarray(hi, dtype=float).reshape(n)
        if np.any(lo > 0) or np.any(hi < 0):
            raise GeneratorError("domain box must contain the origin")
        for arr in (c, d, lo, hi):
            arr.setflags(write=False)
        return cls(n, int(k_max), c, d, lo, hi, has_jumps, model)


def get_basis_order(n: int, size: int) -> int:
    deg = 0
    while math.comb(n + deg, n) < size:
        deg += 1
    return deg


def build_generator(model) -> GeneratorSpec:
    """Assemble a_alpha from drift (|alpha|=1), diffusion/2 (|alpha|=2) and jump moments/alpha!."""
    if isinstance(model, dict):
        model = ModelSpec.from_dict(model)
    n = model.n
    if model.jumps is not None:
        lam = model.jumps.intensity(model.box_vertices())
        if np.any(lam < -1e-14):
            raise ModelSpecError("jump intensity lambda0 + lambda1 . x is negative on the domain box")
    for v in model.box_vertices():
        if np.all(np.isfinite(v)):
            a = model.diffusion(v)
            if np.linalg.eigvalsh(a).min() < -1e-12 * max(1.0, np.abs(a).max()):
                raise ModelSpecError(f"diffusion matrix is not PSD at box vertex {v.tolist()}")
    coeffs: dict = {}

    def add(alpha, cv, dv):
        alpha = MultiIndex(alpha)
        c0, d0 = coeffs.get(alpha, (0.0, np.zeros(n)))
        coeffs[alpha] = (c0 + cv, d0 + dv)

    for j in range(n):
        add(MultiIndex.unit(n, j), model.drift_const[j], model.drift_linear[j])
    for i in range(n):
        for j in range(i, n):
            alpha = MultiIndex.unit(n, i) + MultiIndex.unit(n, j)
            # (1/2) sum_{ij} a_ij d_i d_j: diagonal gets a_ii/2, off-diagonal pair a_ij
            w = 0.5 if i == j else 1.0
            add(alpha, w * model.diff_const[i, j], w * model.diff_linear[:, i, j])
    if model.jumps is not None:
        jp = model.jumps
        for alpha, m in jp.moments.items():
            if 2 <= alpha.order <= model.k_max:
                f = m / alpha.factorial
                add(alpha, jp.lambda0 * f, jp.lambda1 * f)
    return GeneratorSpec.from_coeffs(n, coeffs, k_max=model.k_max, lo=model.lo, hi=model.hi,
                                     has_jumps=model.jumps is not None, model=model)


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymbolCoefficients:
    """b^0_beta(u) and b^1_{beta,kappa}(u), dense over beta in graded-lex order."""

    u: np.ndarray
    b0: np.ndarray
    b1: np.ndarray  # (n_beta, n)
    order: int

    def beta0(self, beta) -> complex:
        return complex(self.b0[get_basis(len(self.u), self.order).index(beta)])

    def beta1(self, beta, kappa: int) -> complex:
        return complex(self.b1[get_basis(len(self.u), self.order).index(beta), kappa])

    def at(self, x) -> complex:
        """b_0(x, u) = b^0_0 + sum_kappa b^1_{0,kappa} x_kappa, i.e. (A f_u)(x) / f_u(x)."""
        return complex(self.b0[0] + np.dot(self.b1[0], x))


def iu_powers(u, degree: int) -> np.ndarray:
    """(iu)^alpha over the graded-lex basis of order <= degree."""
    u = np.asarray(u, dtype=float).reshape(-1)
    basis = get_basis(len(u), degree)
    return monomials(1j * u, basis.exps)


def monomials(x, exps: np.ndarray) -> np.ndarray:
    """x^alpha for each row of ``exps``; ``x`` may be (n,) or (m, n)."""
    x = np.asarray(x)
    if x.ndim == 1:
        out = np.ones(exps.shape[0], dtype=np.result_type(x.dtype, float))
        for k in range(exps.shape[1]):
            out = out * x[k] ** exps[:, k]
        return out
    out = np.ones((x.shape[0], exps.shape[0]), dtype=np.result_type(x.dtype, float))
    for k in range(exps.shape[1]):
        out = out * x[:, k, None] ** exps[None, :, k]
    return out


def symbol_coefficients(gen: GeneratorSpec, u) -> SymbolCoefficients:
    """b^0_beta = sum_alpha c_{alpha+beta} ((alpha+beta)!/alpha!) (iu)^alpha, same for d."""
    u = np.asarray(u, dtype=float).reshape(gen.n)
    K = gen.order
    basis = get_basis(gen.n, K)
    idx, binom = add_table(gen.n, K, K)
    powers = iu_powers(u, K)
    beta_fact = np.array([float(b.factorial) for b in basis.indices])
    valid = idx >= 0
    safe = np.where(valid, idx, 0)
    weight = np.where(valid, binom, 0.0) * powers[None, :]  # (beta, alpha)
    b0 = beta_fact * (weight * gen.c[safe]).sum(axis=1)
    b1 = beta_fact[:, None] * np.einsum("ba,bak->bk", weight, gen.d[safe])
    return SymbolCoefficients(u, b0, b1, K)


# ---------------------------------------------------------------------------
# Growth profile and coefficient bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthProfile:
    d_k: np.ndarray  # d_k[k-1] for k = 1..k_max

    def theta(self, v: float) -> float:
        k = np.arange(1, len(self.d_k) + 1)
        return float(np.sum((2.0 * (1.0 + v)) ** k * self.d_k))

    def __call__(self, v: float) -> float:
        return self.theta(v)


def _sup_candidates(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Points containing every vertex of the pieces of the box on which ||x||_inf is linear.

    |c + d.x| / (1 + ||x||_inf) is quasi-convex on each piece, so its sup over
    the box is attained at one of these points.
    """
    mags = np.unique(np.abs(np.concatenate([lo, hi, [0.0]])))
    vals = np.unique(np.concatenate([mags, -mags]))
    axes = [vals[(vals >= l) & (vals <= h)] for l, h in zip(lo, hi)]
    axes = [np.unique(np.concatenate([a, [l, h]])) for a, l, h in zip(axes, lo, hi)]
    return np.array(list(itertools.product(*axes)), dtype=float)


def growth_profile(gen: GeneratorSpec) -> GrowthProfile:
    if not (np.all(np.isfinite(gen.lo)) and np.all(np.isfinite(gen.hi))):
        raise GeneratorError("growth profile needs a bounded domain box; pass finite domain_box lo/hi")
    pts = _sup_candidates(gen.lo, gen.hi)
    denom = 1.0 + np.max(np.abs(pts), axis=1)
    basis = gen.basis
    d_k = np.zeros(gen.k_max)
    for i in range(1, len(basis)):
        k = int(basis.orders[i])
        val = np.abs(gen.c[i] + pts @ gen.d[i]) / denom
        # derivative in x_j is the constant d_j; its sup of |d_j|/(1+||x||) is at x = 0
        cand = max(float(val.max()), float(np.max(np.abs(gen.d[i]))))
        d_k[k - 1] = max(d_k[k - 1], cand)
    return GrowthProfile(d_k)


def log_coefficient_bound(gen: GeneratorSpec, x, u, r: int, profile: GrowthProfile | None = None) -> float:
    if r == 0:
        return 0.0
    profile = profile or growth_profile(gen)
    th = profile.theta(float(np.max(np.abs(np.asarray(u, dtype=float)))))
    if th == 0.0:
        return -math.inf
    xn = float(np.max(np.abs(np.asarray(x, dtype=float)))) if np.size(x) else 0.0
    return math.lgamma(r + 2) + r * (gen.n * math.log(2.0) + math.log1p(xn) + math.log(th))


def coefficient_bound(gen: GeneratorSpec, x, u, r: int, profile: GrowthProfile | None = None) -> float:
    """(r+1)! 2^{nr} (1 + ||x||)^r theta(||u||)^r with max-norms; inf on overflow."""
    lb = log_coefficient_bound(gen, x, u, r, profile)
    if lb > 709.0:
        return math.inf
    if r == 0:
        return 1.0
    profile = profile or growth_profile(gen)
    th = profile.theta(float(np.max(np.abs(np.asarray(u, dtype=float)))))
    xn = float(np.max(np.abs(np.asarray(x, dtype=float))))
    return float(math.factorial(r + 1)) * 2.0 ** (gen.n * r) * (1.0 + xn) ** r * th**r


def moment_tail(gen: GeneratorSpec, u) -> float:
    """sum_{|alpha| = k_max} sup_box |a_alpha| (1 + ||u||)^{k_max}; proxy for series convergence."""
    basis = gen.basis
    top = basis.orders == gen.k_max
    if not np.any(top):
        return 0.0
    xmax = gen.box_max_norm()
    mag = np.abs(gen.c[top]) + xmax * np.abs(gen.d[top]).sum(axis=1)
    un = float(np.max(np.abs(u)))
    return float(mag.sum() * (1.0 + un) ** gen.k_max)


def check_moment_tail(gen: GeneratorSpec, u, tol: float = DEFAULT_TAIL_TOL) -> str | None:
    """Warn (and return the message) when the truncated jump series looks unconverged at u."""
    if not gen.has_jumps:
        return None
    tail = moment_tail(gen, u)
    if tail > tol:
        msg = f"moment-series tail {tail:.3g} exceeds {tol:.1g} at ||u||={np.max(np.abs(u)):.3g}; raise k_max"
        warnings.warn(msg, MomentTruncationWarning, stacklevel=2)
        return msg
    return None
