"""Taylor and w-substituted expansions of P_s f_u built by polynomial recursion.

With f_u(x) = exp(iu.x) every coefficient is a polynomial in x times f_u:

* g_r  with A^r f_u = g_r f_u                          (Taylor in s)
* h_k  with q_k = h_k f_u, w = 1 - exp(-eta s)        (series in w)

The h_k are reachable three ways: the two-term recursion, the Stirling
combination of the g_r, and the product prod_r (A/eta + r)/k! applied to f_u.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import _kernels
from .generator import (
    GeneratorError,
    GeneratorSpec,
    coefficient_bound,
    growth_profile,
    log_coefficient_bound,
    monomials,
    symbol_coefficients,
)
from .multiindex import StirlingTable, add_table, basis_size, get_basis, stirling_unsigned
from .polynomial import PolyInX

DEFAULT_TOL = 1e-14
STALL_COUNT = 3
GROWTH_COUNT = 5
LOG_OVERFLOW = 700.0
# rounding errors are amplified by the binomial weights of the recursion,
# so the fixed-point width is generous
HP_BITS = 640


class SeriesWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class SeriesExpansion:
    """Ordered coefficient polynomials plus their metadata; never mutated."""

    kind: str  # "taylor-g", "q-series" or "rho-series"
    u: np.ndarray
    eta: float | None
    coeffs: tuple
    truncated: bool = False
    tail_estimate: float = 0.0
    note: str = ""
    dps: int | None = None  # decimal digits when coefficients are mpmath numbers
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.u)
        cap = max(p.cap for p in self.coeffs)
        mat = np.stack([p.as_double().resized(cap).coeffs for p in self.coeffs])
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "_cap", cap)
        object.__setattr__(self, "_n", n)

    @property
    def n(self) -> int:
        return self._n

    @property
    def n_terms(self) -> int:
        return len(self.coeffs)

    @property
    def basis(self):
        return get_basis(self._n, self._cap)

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def values(self, x) -> np.ndarray:
        """Coefficient polynomials evaluated at x: shape (n_terms,) or (m, n_terms)."""
        return monomials(np.asarray(x, dtype=float), self.basis.exps) @ self.matrix.T


# ---------------------------------------------------------------------------
# The generator acting on p(x) f_u(x)
# ---------------------------------------------------------------------------


class _SymbolOperator:
    """p -> A(p f_u)/f_u on polynomials of order <= ``cap``."""

    def __init__(self, gen: GeneratorSpec, u, cap: int, extended: bool = False):
        self.gen = gen
        self.n = gen.n
        self.cap = cap
        self.extended = extended
        sym = symbol_coefficients(gen, u)
        self.b0 = np.ascontiguousarray(sym.b0)
        self.b1 = np.ascontiguousarray(sym.b1)
        if extended:
            # symbols are rounded doubles either way; only the recursion is widened
            self.b0 = np.array([mpmath.mpc(v) for v in self.b0], dtype=object)
            self.b1 = np.array([[mpmath.mpc(v) for v in row] for row in self.b1],
                               dtype=object).reshape(sym.b1.shape)
        basis = get_basis(gen.n, cap)
        self.sub_unit = basis.sub_unit
        self.orders = basis.orders
        self.add_idx, self.add_binom = add_table(gen.n, cap, gen.order)
        self.size = len(basis)

    def __call__(self, p: np.ndarray, deg: int) -> np.ndarray:
        out_size = basis_size(self.n, min(deg + 1, self.cap))
        kernel = _kernels._apply_symbol_numpy if self.extended else _kernels.apply_symbol
        out = kernel(p, deg, self.b0, self.b1, self.add_idx, self.add_binom,
                     self.sub_unit, self.orders, out_size)
        full = np.zeros(self.size, dtype=object if self.extended else np.complex128)
        full[:out_size] = out
        return full


def apply_generator(gen: GeneratorSpec, u, poly: PolyInX) -> PolyInX:
    """Coefficients of A(p f_u)/f_u for a polynomial p."""
    deg = poly.cap
    op = _SymbolOperator(gen, u, deg + 1)
    return PolyInX(gen.n, op(poly.resized(deg + 1).coeffs, deg))


def _start(gen: GeneratorSpec, cap: int, extended: bool = False) -> np.ndarray:
    if extended:
        p = np.array([mpmath.mpc(0)] * basis_size(gen.n, cap), dtype=object)
        p[0] = mpmath.mpc(1)
        return p
    p = np.zeros(basis_size(gen.n, cap), dtype=np.complex128)
    p[0] = 1.0
    return p


def _overflow_order(gen: GeneratorSpec, u, r_max: int) -> int | None:
    """First r whose a-priori bound on |g_r| would overflow a double, if any."""
    if gen.is_zero() or not (np.all(np.isfinite(gen.lo)) and np.all(np.isfinite(gen.hi))):
        return None
    profile = growth_profile(gen)
    xv = np.full(gen.n, gen.box_max_norm())
    for r in range(r_max + 1):
        if log_coefficient_bound(gen, xv, u, r, profile) > LOG_OVERFLOW:
            return r
    return None


def g_sequence(gen: GeneratorSpec, u, r_max: int) -> SeriesExpansion:
    """g_0 = 1 and g_{r+1} = A(g_r f_u)/f_u; stops early if the bound predicts overflow."""
    if r_max < 0:
        raise ValueError("r_max must be >= 0")
    u = np.asarray(u, dtype=float).reshape(gen.n)
    stop = _overflow_order(gen, u, r_max)
    last = r_max if stop is None else stop - 1
    op = _SymbolOperator(gen, u, max(last, 0))
    p = _start(gen, max(last, 0))
    seq = [PolyInX(gen.n, p)]
    for r in range(last):
        p = op(p, r)
        if not np.all(np.isfinite(p)):
            last = r
            break
        seq.append(PolyInX(gen.n, p))
    truncated = len(seq) < r_max + 1
    note = f"truncated at r={len(seq) - 1}: coefficient bound overflows" if truncated else ""
    return SeriesExpansion("taylor-g", u, None, tuple(seq), truncated=truncated, note=note)


def h_sequence(gen: GeneratorSpec, u, eta: float, r_max: int, dps: int | None = None) -> SeriesExpansion:
    """h_0 = 1 and (r+1) h_{r+1} = A(h_r f_u)/(eta f_u) + r h_r.

    With ``dps`` the recursion runs in mpmath at that many decimal digits.
    """
    if not eta > 0:
        raise ValueError("eta must be > 0")
    if r_max < 0:
        raise ValueError("r_max must be >= 0")
    u = np.asarray(u, dtype=float).reshape(gen.n)
    if dps is not None:
        with mpmath.workdps(dps):
            return _h_sequence(gen, u, mpmath.mpf(eta), r_max, dps)
    return _h_sequence(gen, u, float(eta), r_max, None)


def _h_sequence(gen, u, eta, r_max, dps):
    extended = dps is not None
    op = _SymbolOperator(gen, u, r_max, extended)
    p = _start(gen, r_max, extended)
    seq = [PolyInX(gen.n, p)]
    truncated = False
    for r in range(r_max):
        p = (op(p, r) / eta + r * p) / (r + 1)
        if not extended and not np.all(np.isfinite(p)):
            truncated = True
            break
        seq.append(PolyInX(gen.n, p))
    note = f"truncated at k={len(seq) - 1}: non-finite coefficients" if truncated else ""
    return SeriesExpansion("q-series", u, float(eta), tuple(seq), truncated=truncated, note=note,
                           dps=dps)


def q_from_stirling(g_seq, stirling: StirlingTable | None, eta: float, k: int,
                    compensated: bool = False) -> PolyInX:
    """(1/k!) sum_r c[k][r] eta^{-r} g_r."""
    if k >= len(g_seq):
        raise ValueError(f"need g_0..g_{k}, have {len(g_seq)} terms")
    stirling = stirling or stirling_unsigned(k)
    if k > stirling.k_max:
        raise ValueError(f"Stirling table stops at k={stirling.k_max}")
    row = stirling[k]
    cap = max(g_seq[r].cap for r in range(k + 1))
    mats = np.stack([g_seq[r].resized(cap).coeffs for r in range(k + 1)])
    n = g_seq[0].n
    kf = math.factorial(k)
    if not compensated:
        w = np.array([float(row[r]) * eta ** (-r) for r in range(k + 1)])
        return PolyInX(n, (w @ mats) / kf)
    # c[k][r]/k! rounded once from the exact rational
    w = np.array([float(Fraction(row[r], kf)) * eta ** (-r) for r in range(k + 1)])
    terms = w[:, None] * mats
    re = [math.fsum(terms[:, j].real) for j in range(terms.shape[1])]
    im = [math.fsum(terms[:, j].imag) for j in range(terms.shape[1])]
    return PolyInX(n, np.array(re) + 1j * np.array(im))


def q_from_product(gen: GeneratorSpec, u, eta: float, k: int) -> PolyInX:
    """(1/k!) prod_{r=0}^{k-1} (A/eta + r I) applied to f_u, factors applied from r = k-1 down."""
    u = np.asarray(u, dtype=float).reshape(gen.n)
    op = _SymbolOperator(gen, u, max(k, 0))
    p = _start(gen, max(k, 0))
    for step, r in enumerate(range(k - 1, -1, -1)):
        p = op(p, step) / eta + r * p
    return PolyInX(gen.n, p / math.factorial(k))


def q_bound(gen: GeneratorSpec, x, u, eta: float, k: int, profile=None) -> float:
    """Majorant of |q_k| / |f_u|: (1/k!) sum_r c[k][r] eta^{-r} bound(g_r)."""
    profile = profile or growth_profile(gen)
    row = stirling_unsigned(k)[k]
    total = 0.0
    for r, c in enumerate(row):
        if c:
            total += float(c) * eta ** (-r) * coefficient_bound(gen, x, u, r, profile)
    return total / math.factorial(k)


def _power_sum_table(k_max: int) -> list:
    """S[k][l] = sum_j C(l,j) (-1)^j (-j)^k as exact integers (0^0 = 1)."""
    out = []
    for k in range(k_max + 1):
        row = []
        for l in range(k + 1):
            row.append(sum(math.comb(l, j) * (-1) ** j * ((-j) ** k if (j or k) else 1)
                           for j in range(l + 1)))
        out.append(row)
    return out


def verify_qsys(q_seq, g_seq, eta: float, k_max: int, gen: GeneratorSpec | None = None,
                probes=None) -> float:
    """max_k |sum_l q_l S[k][l] - eta^{-k} g_k| at probe points, over the majorant eta^{-k} bound_k."""
    if len(q_seq) <= k_max or len(g_seq) <= k_max:
        raise ValueError("sequences shorter than k_max + 1")
    n = q_seq[0].n
    if probes is None:
        probes = [np.zeros(n)]
        if gen is not None:
            probes += list(gen.box_vertices())
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    S = _power_sum_table(k_max)
    profile = growth_profile(gen) if gen is not None and not gen.is_zero() else None
    u = getattr(q_seq, "u", np.zeros(n))
    worst = 0.0
    for x in probes:
        qv = np.array([q_seq[l](x) for l in range(k_max + 1)])
        gv = np.array([g_seq[k](x) for k in range(k_max + 1)])
        for k in range(k_max + 1):
            lhs = sum(float(S[k][l]) * qv[l] for l in range(k + 1))
            res = abs(lhs - eta ** (-k) * gv[k])
            scale = 1.0
            if profile is not None:
                scale = eta ** (-k) * coefficient_bound(gen, x, u, k, profile)
            worst = max(worst, res / scale)
    return worst


# ---------------------------------------------------------------------------
# eta selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EtaSelection:
    r_u: float
    eta: float
    d_star: float | None
    source: str  # "user", "oracle", "calibrated" or "override"


def select_eta(gen: GeneratorSpec, u, d_star: float | None = None, riccati=None) -> EtaSelection:
    """R_u = 1 / (2^n theta(d*) (1 + sup_box ||x||)), eta = pi / R_u."""
    if d_star is None:
        if riccati is None:
            raise ValueError("supply d_star or a Riccati solution to estimate it")
        d_star = float(riccati.d_star)
        source = "oracle"
    else:
        source = "user"
    if gen.is_zero():
        raise GeneratorError("zero generator: the series is the single term f_u, no eta needed")
    th = growth_profile(gen).theta(float(d_star))
    if th <= 0:
        raise GeneratorError("theta(d*) = 0 for a nonzero generator")
    r_u = 1.0 / (2.0 ** gen.n * th * (1.0 + gen.box_max_norm()))
    return EtaSelection(r_u, math.pi / r_u, float(d_star), source)


def estimate_radius(g_seq, probes=None) -> float:
    """Root-test estimate of the Taylor radius from the tail of (|g_k|/k!)^{1/k}."""
    k_all = np.arange(len(g_seq))
    if probes is None:
        probes = np.zeros((1, g_seq.n))
    vals = np.abs(g_seq.values(np.atleast_2d(probes))).max(axis=0)
    lf = np.array([math.lgamma(k + 1) for k in k_all])
    tail = k_all[len(k_all) // 2:]
    tail = tail[tail > 0]
    with np.errstate(divide="ignore"):
        roots = np.exp((np.log(vals[tail]) - lf[tail]) / tail)
    top = float(np.max(roots)) if len(roots) else 0.0
    return math.inf if top == 0.0 else 1.0 / top


def calibrated_eta(gen: GeneratorSpec, u, r_max: int = 40, d_star: float = None) -> EtaSelection:
    """eta = pi / R with R the root-test radius, clipped to [R_u from the bound, pi]."""
    u = np.asarray(u, dtype=float).reshape(gen.n)
    g = g_sequence(gen, u, r_max)
    probes = np.vstack([np.zeros(gen.n), gen.box_vertices()])
    radius = estimate_radius(g, probes)
    floor = select_eta(gen, u, d_star=float(np.max(np.abs(u))) if d_star is None else d_star).r_u
    r_u = min(max(radius, floor), math.pi)
    return EtaSelection(r_u, math.pi / r_u, d_star, "calibrated")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    n_terms: int
    tail_estimate: float
    converged: bool
    diverging: bool = False
    majorant_tail: float = math.inf
    max_term: float = 0.0


def _sum_terms(coefs: np.ndarray, z: complex, tol: float, compensated: bool = False):
    """sum_k coefs[k] z^k with the consecutive-small-terms stopping rule."""
    partial = 0j
    terms = []
    small = 0
    grow = 0
    diverging = False
    prev = math.inf
    zk = 1.0 + 0j
    last = 0.0
    used = 0
    peak = 0.0
    for k, c in enumerate(coefs):
        term = c * zk if k else c
        zk = zk * z
        mag = abs(term)
        terms.append(term)
        partial += term
        used = k + 1
        last = mag
        peak = max(peak, mag)
        grow = grow + 1 if (k and mag > prev) else 0
        if grow >= GROWTH_COUNT:
            diverging = True
        prev = mag
        small = small + 1 if mag < tol * (1.0 + abs(partial)) else 0
        if small >= STALL_COUNT:
            break
    if compensated and terms:
        arr = np.array(terms)
        partial = complex(math.fsum(arr.real), math.fsum(arr.imag))
    return partial, used, last, small >= STALL_COUNT, diverging, peak


def _phase(u, x) -> complex:
    return complex(np.exp(1j * float(np.dot(u, x))))


def _taylor_majorant(gen, x, u, s, n_used) -> float:
    """Tail of sum (k+1) rho^k beyond n_used with rho = |s| 2^n (1+||x||) theta(||u||)."""
    if gen is None or gen.is_zero():
        return 0.0
    th = growth_profile(gen).theta(float(np.max(np.abs(u))))
    rho = abs(s) * 2.0 ** gen.n * (1.0 + float(np.max(np.abs(x)))) * th
    if rho >= 1.0:
        return math.inf
    N = n_used
    # sum_{k>=N} (k+1) rho^k = rho^N (N + 1 - N rho) / (1 - rho)^2
    return rho**N * (N + 1 - N * rho) / (1.0 - rho) ** 2


def taylor_eval(g_seq: SeriesExpansion, x, s: complex, tol: float = DEFAULT_TOL,
                gen: GeneratorSpec | None = None, compensated: bool = False) -> SeriesValue:
    """sum_k s^k/k! g_k(x) e^{iu.x}; also accepts a ``HighPrecisionTaylor``."""
    if isinstance(g_seq, HighPrecisionTaylor):
        return _taylor_eval_hp(g_seq, x, float(np.real(s)), tol)
    x = np.asarray(x, dtype=float).reshape(g_seq.n)
    vals = g_seq.values(x)
    inv_fact = np.array([math.exp(-math.lgamma(k + 1)) for k in range(len(vals))])
    total, used, last, ok, _, peak = _sum_terms(vals * inv_fact, complex(s), tol, compensated)
    if not ok:
        warnings.warn(f"Taylor series at s={s} not converged after {used} terms", SeriesWarning,
                      stacklevel=2)
    if peak * np.finfo(float).eps > tol * (1.0 + abs(total)):
        warnings.warn(f"Taylor terms peak at {peak:.3g} at s={s}; double precision cannot reach "
                      f"tol={tol:g}, use g_sequence_hp", SeriesWarning, stacklevel=2)
    major = _taylor_majorant(gen, x, g_seq.u, s, used) if gen is not None else math.inf
    return SeriesValue(total * _phase(g_seq.u, x), used, last, ok, False, major, peak)


def w_of_s(eta: float, s: float) -> float:
    if s < 0:
        raise ValueError("s must be >= 0")
    return 1.0 if math.isinf(s) else -math.expm1(-eta * s)


def q_series_eval(q_seq: SeriesExpansion, eta: float | None, x, s: float,
                  tol: float = DEFAULT_TOL, compensated: bool = False) -> SeriesValue:
    """sum_k h_k(x) w^k e^{iu.x} with w = 1 - exp(-eta s); s = inf gives w = 1."""
    eta = q_seq.eta if eta is None else eta
    x = np.asarray(x, dtype=float).reshape(q_seq.n)
    w = w_of_s(eta, s)
    total, used, last, ok, diverging, peak = _sum_terms(q_seq.values(x), w, tol, compensated)
    if not ok:
        warnings.warn(f"q-series at s={s} not converged after {used} terms", SeriesWarning,
                      stacklevel=2)
    if diverging:
        warnings.warn(f"q-series terms grew for {GROWTH_COUNT} consecutive orders at s={s}",
                      SeriesWarning, stacklevel=2)
    return SeriesValue(total * _phase(q_seq.u, x), used, last, ok, diverging, max_term=peak)


# ---------------------------------------------------------------------------
# Extended-precision Taylor path
#
# For strongly oscillating cases (e.g. OU at |u| s ~ 3) the Taylor terms reach
# 1e11 before cancelling to O(1e-2), which double precision cannot resolve.
# The recursion is rerun on gk/k! in binary fixed point with Python integers:
# the model data enters as exact doubles, only the arithmetic is widened.
# ---------------------------------------------------------------------------


def _to_fixed(values, bits: int) -> np.ndarray:
    return np.array([int(Fraction(float(v)) * (1 << bits)) for v in np.ravel(values)], dtype=object)


def _fixed_to_float(v: int, bits: int) -> float:
    return float(Fraction(v, 1 << bits))


@dataclass(frozen=True, eq=False)
class HighPrecisionTaylor:
    """Scaled Taylor coefficients g_k/k! held as fixed-point integers (real, imag)."""

    u: np.ndarray
    bits: int
    re: tuple  # per k: object array over the basis of order <= k
    im: tuple
    n: int
    truncated: bool = False

    @property
    def n_terms(self) -> int:
        return len(self.re)

    def term_values(self, x) -> list:
        """Exact fixed-point values of g_k(x)/k! for the double point x."""
        x = np.asarray(x, dtype=float).reshape(self.n)
        one = 1 << self.bits
        xf = [int(Fraction(float(v)) * one) for v in x]
        top = max(len(re) for re in self.re)
        basis = get_basis(self.n, get_basis_order(self.n, top))
        mono = [one]
        for i in range(1, len(basis)):
            k = int(np.argmax(basis.exps[i] > 0))
            mono.append((mono[basis.sub_unit[i, k]] * xf[k]) >> self.bits)
        out = []
        for re, im in zip(self.re, self.im):
            vr = sum(a * m for a, m in zip(re, mono)) >> self.bits
            vi = sum(a * m for a, m in zip(im, mono)) >> self.bits
            out.append((vr, vi))
        return out


def get_basis_order(n: int, size: int) -> int:
    deg = 0
    while basis_size(n, deg) < size:
        deg += 1
    return deg


def g_sequence_hp(gen: GeneratorSpec, u, r_max: int, bits: int = HP_BITS) -> HighPrecisionTaylor:
    """g_k/k! for k <= r_max in fixed point with ``bits`` fractional bits."""
    u = np.asarray(u, dtype=float).reshape(gen.n)
    sym = symbol_coefficients(gen, u)
    K = gen.order
    cap = max(r_max, 1)
    basis = get_basis(gen.n, cap)
    idx, binom = add_table(gen.n, cap, K)
    nk = min(len(sym.b0), idx.shape[1])
    b0r, b0i = _to_fixed(sym.b0.real[:nk], bits), _to_fixed(sym.b0.imag[:nk], bits)
    b1r = [_to_fixed(sym.b1.real[:nk, k], bits) for k in range(gen.n)]
    b1i = [_to_fixed(sym.b1.imag[:nk, k], bits) for k in range(gen.n)]
    ibinom = np.array([[int(v) for v in row] for row in binom[:, :nk]], dtype=object)
    has_b1 = bool(np.any(sym.b1))
    zero = np.zeros(1, dtype=object)
    pr = np.array([1 << bits], dtype=object)
    pi = np.array([0], dtype=object)
    deg = 0  # highest order carrying a nonzero coefficient
    re_seq, im_seq = [pr], [pi]
    for r in range(r_max):
        rows = basis_size(gen.n, deg + (1 if has_b1 else 0))
        width = basis_size(gen.n, deg)
        padr = np.concatenate([pr[:width], zero])
        padi = np.concatenate([pi[:width], zero])

        def gather(src, coef_r, coef_i, weight):
            s = np.where((src >= 0) & (src < width), src, width)
            xr, xi = padr[s], padi[s]
            accr = (weight * (xr * coef_r[None, :] - xi * coef_i[None, :])).sum(axis=1)
            acci = (weight * (xr * coef_i[None, :] + xi * coef_r[None, :])).sum(axis=1)
            return accr, acci

        outr, outi = gather(idx[:rows, :nk], b0r, b0i, ibinom[:rows])
        if has_b1:
            for k in range(gen.n):
                gm = basis.sub_unit[:rows, k]
                ok = gm >= 0
                g = np.where(ok, gm, 0)
                src = np.where(ok[:, None], idx[g, :nk], -1)
                w = np.where(ok[:, None], ibinom[g], 0)
                ar, ai = gather(src, b1r[k], b1i[k], w)
                outr, outi = outr + ar, outi + ai
        scale = (r + 1) << bits
        pr = np.array([v // scale for v in outr], dtype=object)
        pi = np.array([v // scale for v in outi], dtype=object)
        nz = [i for i in range(rows) if pr[i] or pi[i]]
        deg = int(basis.orders[nz[-1]]) if nz else 0
        keep = basis_size(gen.n, deg)
        pr, pi = pr[:keep], pi[:keep]
        re_seq.append(pr)
        im_seq.append(pi)
    return HighPrecisionTaylor(u, bits, tuple(re_seq), tuple(im_seq), gen.n)


def _taylor_eval_hp(series: HighPrecisionTaylor, x, s: float, tol: float) -> SeriesValue:
    bits = series.bits
    one = 1 << bits
    sf = int(Fraction(float(s)) * one)
    sk = one
    accr = acci = 0
    small = 0
    used = 0
    last = 0.0
    for k, (vr, vi) in enumerate(series.term_values(x)):
        tr, ti = (vr * sk) >> bits, (vi * sk) >> bits
        accr += tr
        acci += ti
        sk = (sk * sf) >> bits
        used = k + 1
        last = math.hypot(_fixed_to_float(tr, bits), _fixed_to_float(ti, bits))
        partial = math.hypot(_fixed_to_float(accr, bits), _fixed_to_float(acci, bits))
        small = small + 1 if last < tol * (1.0 + partial) else 0
        if small >= STALL_COUNT:
            break
    ok = small >= STALL_COUNT
    if not ok:
        warnings.warn(f"Taylor series at s={s} not converged after {used} terms", SeriesWarning,
                      stacklevel=3)
    value = complex(_fixed_to_float(accr, bits), _fixed_to_float(acci, bits))
    return SeriesValue(value * _phase(series.u, x), used, last, ok)
