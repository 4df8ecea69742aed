"""Generalized Riccati system for the log-affine exponent, integrated with scipy.

dC/ds = sum_alpha c_alpha D^alpha,  dD_j/ds = sum_alpha (d_alpha)_j D^alpha,
C(0) = 0, D(0) = iu.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .generator import GeneratorSpec, monomials

EXPLOSION_THRESHOLD = 1e8


class BlowUpError(ValueError):
    """Queried beyond the estimated explosion time of the Riccati solution."""


def riccati_rhs(gen: GeneratorSpec, y) -> tuple[complex, np.ndarray]:
    """(dC, dD) at D = y: the truncated power sums of the generator coefficients."""
    y = np.asarray(y, dtype=complex).reshape(gen.n)
    mono = monomials(y, gen.basis.exps)
    return complex(mono @ gen.c), mono @ gen.d


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    u: np.ndarray
    grid: np.ndarray
    C_vals: np.ndarray
    D_vals: np.ndarray  # (m, n)
    blow_up_time: float | None
    d_star: float
    rtol: float
    _spline: CubicHermiteSpline = field(repr=False, default=None)

    @property
    def s_max(self) -> float:
        return float(self.grid[-1])

    def at(self, s: float) -> tuple[complex, np.ndarray]:
        """Interpolated (C, D) at s."""
        if s < 0:
            raise ValueError("s must be >= 0")
        if self.blow_up_time is not None and s >= self.blow_up_time:
            raise BlowUpError(f"s={s} is beyond the explosion estimate {self.blow_up_time:.6g}")
        if s > self.grid[-1] * (1 + 1e-12):
            raise ValueError(f"s={s} beyond the integrated range {self.grid[-1]}")
        v = self._spline(min(s, self.grid[-1]))
        return complex(v[0]), np.asarray(v[1:])


def _pack(gen):
    n = gen.n
    exps = gen.basis.exps
    c = gen.c
    d = gen.d

    def f(_s, y):
        D = y[1:]
        mono = np.ones(len(c), dtype=complex)
        for k in range(n):
            mono = mono * D[k] ** exps[:, k]
        out = np.empty(n + 1, dtype=complex)
        out[0] = mono @ c
        out[1:] = mono @ d
        return out

    return f


def solve_riccati(gen: GeneratorSpec, u, s_max: float, rtol: float = 1e-9, atol: float | None = None,
                  threshold: float = EXPLOSION_THRESHOLD, max_step: float | None = None) -> RiccatiSolution:
    """Adaptive DOP853 integration from s = 0; stops at the explosion threshold."""
    if not s_max > 0:
        raise ValueError("s_max must be > 0")
    u = np.asarray(u, dtype=float).reshape(gen.n)
    f = _pack(gen)
    y0 = np.concatenate([[0j], 1j * u])

    def explode(_s, y):
        return threshold - np.max(np.abs(y))

    explode.terminal = True
    atol = rtol * 1e-3 if atol is None else atol
    sol = solve_ivp(f, (0.0, s_max), y0, method="DOP853", rtol=rtol, atol=atol,
                    max_step=max_step or s_max / 256, events=explode)
    grid = sol.t
    Y = sol.y.T
    blow = None
    if sol.status == 1 and len(sol.t_events[0]):
        blow = float(sol.t_events[0][0])
    elif sol.status == -1:
        blow = float(grid[-1])  # step-size underflow reads as explosion
    dY = np.array([f(s, y) for s, y in zip(grid, Y)])
    if len(grid) < 2:
        grid = np.array([0.0, 1e-300])
        Y = np.vstack([Y, Y])
        dY = np.vstack([dY, dY])
    spline = CubicHermiteSpline(grid, Y, dY, axis=0)
    d_star = float(np.max(np.abs(Y[:, 1:]))) if gen.n else 0.0
    return RiccatiSolution(u, grid, Y[:, 0], Y[:, 1:], blow, d_star, rtol, spline)


def char_fn_riccati(sol: RiccatiSolution, x, s: float) -> complex:
    """exp(C(s,u) + x.D(s,u))."""
    x = np.asarray(x, dtype=float).reshape(len(sol.u))
    C, D = sol.at(s)
    return complex(np.exp(C + x @ D))


def cd_grid(sol: RiccatiSolution, s_values) -> tuple[np.ndarray, np.ndarray]:
    vals = [sol.at(float(s)) for s in s_values]
    return np.array([v[0] for v in vals]), np.array([v[1] for v in vals])


def self_convergence(gen: GeneratorSpec, u, s_max: float, rtol: float) -> float:
    """Relative change of (C, D) at s_max when rtol is halved."""
    a = solve_riccati(gen, u, s_max, rtol)
    b = solve_riccati(gen, u, s_max, rtol / 2)
    ya = np.concatenate([[a.C_vals[-1]], a.D_vals[-1]])
    yb = np.concatenate([[b.C_vals[-1]], b.D_vals[-1]])
    return float(np.max(np.abs(ya - yb)) / max(1.0, math.fsum(np.abs(yb))))
