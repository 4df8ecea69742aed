"""Logarithm of the w-series and the affine exponent C(s,u) + x.D(s,u)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np

from .polynomial import PolyInX
from .series_engine import SeriesExpansion, SeriesValue, SeriesWarning, _sum_terms, w_of_s

DEFAULT_AFFINE_TOL = 1e-8
_EPS = np.finfo(float).eps
MAX_REFINE = 60


class AffinityError(ValueError):
    """A log coefficient carries terms of order >= 2 in x beyond tolerance."""


class ZeroCrossingError(ValueError):
    """The constant-coefficient series vanishes, so its logarithm is undefined."""


@dataclass(frozen=True, eq=False)
class RhoSeries:
    eta: float
    u: np.ndarray
    rho0: np.ndarray  # (K+1,)
    rho1: np.ndarray  # (K+1, n)
    affinity_residuals: np.ndarray  # max |coef| with |gamma| >= 2, per k
    scales: np.ndarray  # max |coef| of rho_k, per k
    floors: np.ndarray  # roundoff level of rho_k at the working precision, per k
    polys: tuple

    @property
    def n_terms(self) -> int:
        return len(self.rho0)

    def relative_residuals(self) -> np.ndarray:
        """Order >= 2 share of each rho_k; residuals at or below the roundoff floor count as zero."""
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = self.affinity_residuals / self.scales
        rel = np.where(self.affinity_residuals <= self.floors, 0.0, rel)
        return np.nan_to_num(rel, nan=0.0)

    def as_expansion(self) -> SeriesExpansion:
        return SeriesExpansion("rho-series", self.u, self.eta, self.polys)


def rho_sequence(h_seq: SeriesExpansion, k_max: int | None = None,
                 affine_tol: float | None = DEFAULT_AFFINE_TOL) -> RhoSeries:
    """rho_k = h_k - (1/k) sum_{j<k} j rho_j h_{k-j}, with rho_0 = iu.x; then split affinely.

    ``affine_tol=None`` records residuals without raising.
    """
    if h_seq.dps is not None:
        with mpmath.workdps(h_seq.dps):
            return _rho_sequence(h_seq, k_max, affine_tol)
    return _rho_sequence(h_seq, k_max, affine_tol)


def _rho_sequence(h_seq, k_max, affine_tol):
    k_max = len(h_seq) - 1 if k_max is None else k_max
    if k_max >= len(h_seq):
        raise ValueError(f"need h_0..h_{k_max}, have {len(h_seq)} terms")
    u = np.asarray(h_seq.u, dtype=float)
    n = len(u)
    if abs(h_seq[0].coeff((0,) * n) - 1.0) > 1e-14:
        raise ValueError("h_0 must be the constant 1")
    cap = k_max
    h = [h_seq[k].resized(cap) for k in range(k_max + 1)]
    hmax = [p.max_abs() for p in h]
    rho0_poly = PolyInX.from_terms(n, {tuple(int(i == j) for i in range(n)): 1j * u[j] for j in range(n)}, cap=cap)
    if h_seq.dps is not None:
        rho0_poly = PolyInX(n, np.array([mpmath.mpc(v) for v in rho0_poly.coeffs], dtype=object))
    rho = [rho0_poly]
    # j/k must not be rounded to a double in extended mode
    ratio = (lambda j, k: mpmath.mpf(j) / k) if h_seq.dps is not None else (lambda j, k: j / k)
    eps = 10.0 ** (-h_seq.dps) if h_seq.dps is not None else _EPS
    width = len(h[0].coeffs)
    # roundoff level: the largest rounding seen so far, since noise in an early
    # rho_j is carried into every later rho_k
    err = [0.0]
    for k in range(1, k_max + 1):
        acc = h[k]
        mag = hmax[k]
        for j in range(1, k):
            acc = acc - rho[j].mul(h[k - j], cap=cap).scale(ratio(j, k))
            mag += j / k * rho[j].max_abs() * hmax[k - j] * width
        rho.append(acc)
        err.append(max(err[-1], 64 * eps * max(mag, max(p.max_abs() for p in rho))))
    dbl = [p.as_double() for p in rho]
    rho0 = np.array([p.coeffs[0] for p in dbl])
    rho1 = np.array([p.coeffs[1:n + 1] if len(p.coeffs) > n else np.zeros(n, complex) for p in dbl])
    resid = np.zeros(k_max + 1)
    scales = np.zeros(k_max + 1)
    floors = np.zeros(k_max + 1)
    for k, p in enumerate(rho):
        hi = p.abs_coeffs()[p.basis.orders >= 2]
        resid[k] = float(hi.max()) if hi.size else 0.0
        scales[k] = p.max_abs()
        floors[k] = err[k]
    out = RhoSeries(float(h_seq.eta), u, rho0, rho1, resid, scales, floors, tuple(rho))
    if affine_tol is not None:
        rel = out.relative_residuals()
        bad = np.flatnonzero(rel > affine_tol)
        if bad.size:
            k = int(bad[0])
            raise AffinityError(f"rho_{k} has order>=2 terms of relative size {rel[k]:.3g} > {affine_tol:g}")
    return out


def log_affine_eval(rho: RhoSeries, x, s: float, tol: float = 1e-14) -> SeriesValue:
    """exp(sum_k (rho0_k + x.rho1_k) w^k) with w = 1 - exp(-eta s)."""
    x = np.asarray(x, dtype=float).reshape(len(rho.u))
    coefs = rho.rho0 + rho.rho1 @ x
    w = w_of_s(rho.eta, s)
    total, used, last, ok, diverging, peak = _sum_terms(coefs, w, tol)
    return SeriesValue(complex(np.exp(total)), used, last, ok, diverging, max_term=peak)


# ---------------------------------------------------------------------------
# C and D from the h coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogAffineExponent:
    C: complex
    D: np.ndarray
    s: float
    u: np.ndarray
    branch_windings: int = 0


def _const_and_linear(h_seq: SeriesExpansion):
    n = h_seq.n
    mat = h_seq.matrix
    const = mat[:, 0]
    lin = mat[:, 1:n + 1] if mat.shape[1] > n else np.zeros((mat.shape[0], n), complex)
    return const, lin


def _powers(w: np.ndarray, k: int) -> np.ndarray:
    return w[:, None] ** np.arange(k)[None, :]


def cd_path(h_seq: SeriesExpansion, eta: float | None, s_values, tol: float = 1e-12,
            max_step_angle: float = math.pi / 2):
    """C and D along increasing s with the logarithm continued from C(0) = 0.

    Extra grid points are inserted until successive arguments of the
    constant-coefficient series differ by less than ``max_step_angle``.
    Returns (C, D, windings) arrays at ``s_values``.
    """
    eta = h_seq.eta if eta is None else eta
    s_values = np.asarray(s_values, dtype=float)
    if np.any(s_values < 0):
        raise ValueError("s must be >= 0")
    const, lin = _const_and_linear(h_seq)
    K = len(const)
    u = np.asarray(h_seq.u, dtype=float)
    smax = float(s_values.max()) if s_values.size else 0.0

    def den_at(s):
        w = -np.expm1(-eta * np.asarray(s, dtype=float))
        P = _powers(w, K)
        return P @ const, np.abs(P) @ np.abs(const)

    grid = np.unique(np.concatenate([[0.0], s_values, np.linspace(0.0, smax, 65)]))
    for _ in range(MAX_REFINE):
        den, scale = den_at(grid)
        # a zero, or cancellation so deep that the value is roundoff
        small = ~(np.abs(den) > tol * scale)
        if np.any(small):
            raise ZeroCrossingError("constant-coefficient series vanishes to within roundoff "
                                    f"near s={grid[np.argmax(small)]:.6g}")
        jump = np.abs(np.angle(den[1:] / den[:-1]))
        if not np.any(jump >= max_step_angle):
            break
        mids = 0.5 * (grid[1:] + grid[:-1])[jump >= max_step_angle]
        grid = np.unique(np.concatenate([grid, mids]))
    else:
        raise ZeroCrossingError("argument of the constant series changes too fast to follow")
    arg = np.angle(den[0]) + np.concatenate([[0.0], np.cumsum(np.angle(den[1:] / den[:-1]))])
    logs = np.log(np.abs(den)) + 1j * arg
    windings = np.rint((arg - np.angle(den)) / (2 * np.pi)).astype(int)
    pos = np.searchsorted(grid, s_values)
    w = -np.expm1(-eta * s_values)
    P = _powers(w, K)
    den = P @ const
    tail = np.abs(P[:, -1]) * np.maximum(np.abs(const[-1]), np.abs(lin[-1]).max(initial=0.0))
    bad = tail > tol * np.abs(den)
    if np.any(bad):
        warnings.warn(f"w-series truncated at order {K - 1} is not converged at s={s_values[bad][0]:.6g}; "
                      "raise r_max or lower eta", SeriesWarning, stacklevel=2)
    D = 1j * u[None, :] + (P[:, 1:] @ lin[1:]) / den[:, None]
    return logs[pos], D, windings[pos]


def cd_from_h(h_seq: SeriesExpansion, eta: float | None, s: float, tol: float = 1e-12) -> LogAffineExponent:
    """C = log sum_r h_{r,0} w^r (continuous branch), D = iu + sum_r h_{r,e_k} w^r / sum_r h_{r,0} w^r."""
    C, D, wind = cd_path(h_seq, eta, [s], tol)
    return LogAffineExponent(complex(C[0]), D[0], float(s), np.asarray(h_seq.u, dtype=float), int(wind[0]))
