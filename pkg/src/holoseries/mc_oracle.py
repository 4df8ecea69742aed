"""Euler-Maruyama simulation of affine jump-diffusions with thinned affine-intensity jumps."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend, _kernels
from .modelspec import JumpDistribution, ModelSpec

DEFAULT_PATHS = 200_000
DEFAULT_STEPS = 512
BLOCK = 8192
CLAMP_WARN = 0.01


class ClampWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class SDEModel:
    n: int
    b0: np.ndarray
    B: np.ndarray
    a0: np.ndarray
    a1: np.ndarray  # a(x) = a0 + sum_i x_i a1[i]
    lambda0: float
    lambda1: np.ndarray
    jumps: JumpDistribution | None

    @property
    def mean_jump(self) -> np.ndarray:
        return self.jumps.first_moment if self.jumps is not None else np.zeros(self.n)

    @classmethod
    def from_spec(cls, spec: ModelSpec) -> "SDEModel":
        n = spec.n
        lam0, lam1, dist = 0.0, np.zeros(n), None
        if spec.jumps is not None:
            if spec.jumps.distribution is None:
                raise ValueError("simulation needs a jump distribution, not just moments")
            lam0, lam1, dist = spec.jumps.lambda0, spec.jumps.lambda1, spec.jumps.distribution
        f = lambda a: np.ascontiguousarray(a, dtype=float)
        return cls(n, f(spec.drift_const), f(spec.drift_linear), f(spec.diff_const), f(spec.diff_linear),
                   float(lam0), f(lam1), dist)

    def perturbed_drift(self, delta: float) -> "SDEModel":
        return SDEModel(self.n, self.b0 + delta, self.B, self.a0, self.a1, self.lambda0, self.lambda1, self.jumps)


@dataclass(frozen=True, eq=False)
class Terminals:
    values: np.ndarray  # (n_paths, n)
    dt: float
    n_steps: int
    seed: int
    clamp_fraction: float

    @property
    def n_paths(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class MCEstimate:
    value: complex
    stderr: float
    stderr_re: float
    stderr_im: float
    n_paths: int
    dt: float
    seed: int
    clamp_fraction: float


def _run_block(model: SDEModel, x0, s, n_steps, n_paths, seed_seq):
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    n = model.n
    dt = s / n_steps
    x = np.tile(np.asarray(x0, dtype=float), (n_paths, 1))
    chol = np.zeros((n, n))
    mean_jump = np.ascontiguousarray(model.mean_jump, dtype=float)
    empty_u = np.zeros(0)
    empty_z = np.zeros((0, n))
    no_cand = np.zeros(n_paths, dtype=np.int64)
    clamps = 0
    for _ in range(n_steps):
        normals = rng.standard_normal((n_paths, n))
        lam_bar = 0.0
        n_cand, cand_u, cand_z = no_cand, empty_u, empty_z
        if model.jumps is not None:
            lam_bar = max(float(np.max(model.lambda0 + x @ model.lambda1)), 0.0)
            if lam_bar > 0:
                n_cand = rng.poisson(lam_bar * dt, n_paths).astype(np.int64)
                total = int(n_cand.sum())
                cand_u = rng.random(total)
                cand_z = np.ascontiguousarray(model.jumps.sample(rng, total), dtype=float)
        clamps += _kernels.mc_step(x, dt, model.b0, model.B, model.a0, model.a1, model.lambda0,
                                   model.lambda1, mean_jump, lam_bar, normals, n_cand, cand_u,
                                   cand_z, chol)
    return x, clamps


def simulate_paths(model: SDEModel | ModelSpec, x0, s: float, n_paths: int = DEFAULT_PATHS,
                   dt: float | None = None, seed: int = 0, block: int = BLOCK,
                   threads: int | None = None) -> Terminals:
    """Terminal states X_s from x0; blocks draw from child streams of ``seed``, so results
    do not depend on the thread count."""
    if isinstance(model, ModelSpec):
        model = SDEModel.from_spec(model)
    if s < 0:
        raise ValueError("s must be >= 0")
    x0 = np.asarray(x0, dtype=float).reshape(model.n)
    if s == 0:
        return Terminals(np.tile(x0, (n_paths, 1)), 0.0, 0, seed, 0.0)
    dt = s / DEFAULT_STEPS if dt is None else dt
    if dt > s:
        raise ValueError("dt must be <= s")
    n_steps = max(1, math.ceil(s / dt - 1e-9))
    sizes = [min(block, n_paths - i) for i in range(0, n_paths, block)]
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    threads = threads or _backend.thread_cap()
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(sizes))) as pool:
            results = list(pool.map(lambda a: _run_block(model, x0, s, n_steps, *a), zip(sizes, children)))
    else:
        results = [_run_block(model, x0, s, n_steps, m, c) for m, c in zip(sizes, children)]
    values = np.vstack([r[0] for r in results])
    clamp_fraction = sum(r[1] for r in results) / (n_paths * n_steps)
    if clamp_fraction > CLAMP_WARN:
        warnings.warn(f"variance or intensity clamped in {clamp_fraction:.2%} of path steps",
                      ClampWarning, stacklevel=2)
    return Terminals(values, s / n_steps, n_steps, seed, clamp_fraction)


def mc_char_fn(terminals: Terminals, u) -> MCEstimate:
    """Sample mean of exp(iu.X_s) with standard errors."""
    vals = terminals.values
    if len(vals) == 0:
        raise ValueError("no terminal values")
    u = np.asarray(u, dtype=float).reshape(vals.shape[1])
    z = np.exp(1j * (vals @ u))
    m = len(z)
    ddof = 1 if m > 1 else 0
    se_re = float(np.std(z.real, ddof=ddof) / math.sqrt(m))
    se_im = float(np.std(z.imag, ddof=ddof) / math.sqrt(m))
    return MCEstimate(complex(z.mean()), math.hypot(se_re, se_im), se_re, se_im, m,
                      terminals.dt, terminals.seed, terminals.clamp_fraction)
