"""Canonical affine test models and their closed-form characteristic functions."""
from __future__ import annotations

import numpy as np

from .modelspec import ModelSpec


def _doc(n, drift_const=None, drift_linear=None, diff_const=None, diff_linear=None,
         jumps=None, lo=None, hi=None, k_max=20, name=""):
    doc = {
        "dimension": n,
        "drift": {
            "const": np.zeros(n).tolist() if drift_const is None else drift_const,
            "linear": np.zeros((n, n)).tolist() if drift_linear is None else drift_linear,
        },
        "diffusion": {
            "const": np.zeros((n, n)).tolist() if diff_const is None else diff_const,
            "linear": np.zeros((n, n, n)).tolist() if diff_linear is None else diff_linear,
        },
        "domain_box": {"lo": [-1.0] * n if lo is None else lo, "hi": [1.0] * n if hi is None else hi},
        "k_max": k_max,
        "name": name,
    }
    if jumps is not None:
        doc["jumps"] = jumps
    return doc


def zero_model(n: int = 1) -> ModelSpec:
    return ModelSpec.from_dict(_doc(n, name="zero"))


def brownian(sigma2: float = 1.0) -> ModelSpec:
    return ModelSpec.from_dict(_doc(1, diff_const=[[sigma2]], name="brownian"))


def ornstein_uhlenbeck(kappa: float = 1.0, sigma2: float = 2.0) -> ModelSpec:
    return ModelSpec.from_dict(_doc(1, drift_linear=[[-kappa]], diff_const=[[sigma2]], name="ou"))


def compound_poisson(lambda0: float = 0.5, jump: float = 1.0, k_max: int = 30) -> ModelSpec:
    jumps = {"lambda0": lambda0, "lambda1": [0.0],
             "distribution": {"kind": "atoms", "points": [[jump]], "weights": [1.0]}}
    return ModelSpec.from_dict(_doc(1, jumps=jumps, k_max=k_max, name="compound_poisson"))


def square_root(kappa: float = 1.0, theta: float = 0.5, sigma: float = 0.5) -> ModelSpec:
    """CIR-type: b(x) = kappa (theta - x), a(x) = sigma^2 x on the box [0, 1]."""
    return ModelSpec.from_dict(_doc(1, drift_const=[kappa * theta], drift_linear=[[-kappa]],
                                    diff_linear=[[[sigma**2]]], lo=[0.0], hi=[1.0],
                                    name="square_root"))


def affine_jump_1d(lambda0: float = 0.4, lambda1: float = 0.3, drift: float = 0.0,
                   diffusion: float = 0.0, jump: float = 1.0, k_max: int = 20,
                   name: str = "affine_jump") -> ModelSpec:
    """One-dimensional model whose every coefficient is a multiple of lambda0 + lambda1 x."""
    jumps = {"lambda0": lambda0, "lambda1": [lambda1],
             "distribution": {"kind": "atoms", "points": [[jump]], "weights": [1.0]}}
    return ModelSpec.from_dict(_doc(1, drift_const=[lambda0 * drift], drift_linear=[[lambda1 * drift]],
                                    diff_const=[[lambda0 * diffusion]],
                                    diff_linear=[[[lambda1 * diffusion]]],
                                    jumps=jumps, lo=[0.0], hi=[1.0], k_max=k_max, name=name))


def gaussian_2d() -> ModelSpec:
    """Two-factor mean-reverting Gaussian model with correlated noise."""
    return ModelSpec.from_dict(_doc(2, drift_const=[0.1, 0.0], drift_linear=[[-1.0, 0.2], [0.0, -0.5]],
                                    diff_const=[[1.0, 0.3], [0.3, 0.5]], k_max=2, name="gaussian_2d"))


def heston_like_2d() -> ModelSpec:
    """Log-price and square-root variance; the box keeps the variance factor PSD."""
    kappa, theta, xi, rho = 1.5, 0.4, 0.3, -0.5
    lin_v = [[1.0, rho * xi], [rho * xi, xi**2]]
    return ModelSpec.from_dict(_doc(2, drift_const=[0.0, kappa * theta],
                                    drift_linear=[[0.0, -0.5], [0.0, -kappa]],
                                    diff_linear=[np.zeros((2, 2)).tolist(), lin_v],
                                    lo=[-1.0, 0.0], hi=[1.0, 1.0], name="heston_like"))


CANONICAL = {
    "brownian": brownian,
    "ou": ornstein_uhlenbeck,
    "compound_poisson": compound_poisson,
    "square_root": square_root,
}


# ---------------------------------------------------------------------------
# Closed forms p(s, x, u) = E[exp(iu X_s) | X_0 = x]
# ---------------------------------------------------------------------------


def brownian_cf(s, x, u, sigma2: float = 1.0):
    return np.exp(1j * u * x - sigma2 * u**2 * s / 2.0)


def ou_cf(s, x, u, kappa: float = 1.0, sigma2: float = 2.0):
    return np.exp(1j * u * x * np.exp(-kappa * s) - sigma2 * u**2 * (1 - np.exp(-2 * kappa * s)) / (4 * kappa))


def compound_poisson_cf(s, x, u, lambda0: float = 0.5, jump: float = 1.0):
    return np.exp(1j * u * x + s * lambda0 * (np.exp(1j * u * jump) - 1 - 1j * u * jump))


def square_root_cd(s, u, kappa: float = 1.0, theta: float = 0.5, sigma: float = 0.5):
    """(C, D) for the CIR model; D' = -kappa D + sigma^2 D^2 / 2, C' = kappa theta D."""
    e = np.exp(-kappa * s)
    den = 1 - 1j * u * sigma**2 * (1 - e) / (2 * kappa)
    D = 1j * u * e / den
    C = -(2 * kappa * theta / sigma**2) * np.log(den)
    return C, D


def square_root_cf(s, x, u, **kw):
    C, D = square_root_cd(s, u, **kw)
    return np.exp(C + x * D)
