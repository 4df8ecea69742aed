"""ModelSpec JSON documents: affine drift, affine diffusion and optional jumps.

Schema (all arrays dimension-consistent)::

    {
      "dimension": n,
      "drift":     {"const": [n], "linear": [[n x n]]},           b(x) = const + linear @ x
      "diffusion": {"const": [[n x n]], "linear": [[[n x n]] * n]}, a(x) = const + sum_i x_i linear[i]
      "jumps": {                                                   optional
        "lambda0": float, "lambda1": [n],                          intensity lambda0 + lambda1 . x
        "moments": [{"alpha": [n], "value": float}, ...],          raw moments of the jump law
        "distribution": {"kind": "atoms", "points": [[n]...], "weights": [...]}
                      | {"kind": "normal", "mean": [n], "cov": [[n x n]]}
      },
      "domain_box": {"lo": [n], "hi": [n]},
      "k_max": int
    }

Either ``moments`` or ``distribution`` must be supplied for jumps; missing
moments are filled from the distribution.  The distribution is also what the
Monte Carlo simulator samples from.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .multiindex import MultiIndex, enumerate_multiindices

DEFAULT_K_MAX = 20


class ModelSpecError(ValueError):
    """Raised for malformed or inadmissible model documents."""


def _arr(value, shape, what):
    try:
        out = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelSpecError(f"{what}: not numeric ({exc})") from None
    if out.shape != shape:
        raise ModelSpecError(f"{what}: expected shape {shape}, got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ModelSpecError(f"{what}: non-finite entries")
    return out


def _check_keys(doc: dict, allowed: set, what: str):
    extra = set(doc) - allowed
    if extra:
        raise ModelSpecError(f"{what}: unsupported keys {sorted(extra)} (only affine data is accepted)")


@dataclass(frozen=True)
class JumpDistribution:
    """Finite-activity jump law: weighted atoms or a Gaussian."""

    kind: str
    points: np.ndarray | None = None
    weights: np.ndarray | None = None
    mean: np.ndarray | None = None
    cov: np.ndarray | None = None

    @property
    def first_moment(self) -> np.ndarray:
        if self.kind == "atoms":
            return self.weights @ self.points
        return self.mean

    def raw_moment(self, alpha) -> float:
        alpha = tuple(alpha)
        if self.kind == "atoms":
            return float(self.weights @ np.prod(self.points ** np.array(alpha), axis=1))
        return _normal_moments(self.mean, self.cov, sum(alpha))[alpha]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        n = len(self.first_moment)
        if size == 0:
            return np.zeros((0, n))
        if self.kind == "atoms":
            pick = rng.choice(len(self.weights), size=size, p=self.weights)
            return self.points[pick]
        return rng.multivariate_normal(self.mean, self.cov, size=size, method="cholesky")

    def to_dict(self) -> dict:
        if self.kind == "atoms":
            return {"kind": "atoms", "points": self.points.tolist(), "weights": self.weights.tolist()}
        return {"kind": "normal", "mean": self.mean.tolist(), "cov": self.cov.tolist()}

    @classmethod
    def from_dict(cls, doc: dict, n: int) -> "JumpDistribution":
        kind = doc.get("kind")
        if kind == "atoms":
            _check_keys(doc, {"kind", "points", "weights"}, "jumps.distribution")
            w = np.asarray(doc["weights"], dtype=float)
            pts = _arr(doc["points"], (len(w), n), "jumps.distribution.points")
            if np.any(w < 0) or not math.isclose(w.sum(), 1.0, rel_tol=1e-12):
                raise ModelSpecError("jumps.distribution.weights must be a probability vector")
            return cls("atoms", points=pts, weights=w)
        if kind == "normal":
            _check_keys(doc, {"kind", "mean", "cov"}, "jumps.distribution")
            mean = _arr(doc["mean"], (n,), "jumps.distribution.mean")
            cov = _arr(doc["cov"], (n, n), "jumps.distribution.cov")
            if not np.allclose(cov, cov.T) or np.linalg.eigvalsh(cov).min() < -1e-12:
                raise ModelSpecError("jumps.distribution.cov must be symmetric PSD")
            return cls("normal", mean=mean, cov=cov)
        raise ModelSpecError(f"jumps.distribution.kind must be 'atoms' or 'normal', got {kind!r}")


def _normal_moments(mean, cov, order: int) -> dict:
    """Raw moments E[z^alpha], |alpha| <= order, via Stein's recursion.

    E[z^{a+e_i}] = m_i E[z^a] + sum_j S_ij a_j E[z^{a-e_j}].
    """
    n = len(mean)
    mom = {(0,) * n: 1.0}
    for alpha in enumerate_multiindices(n, order)[1:]:
        i = next(k for k in range(n) if alpha[k] > 0)
        base = tuple(a - (k == i) for k, a in enumerate(alpha))
        val = mean[i] * mom[base]
        for j in range(n):
            if base[j] > 0:
                lower = tuple(b - (k == j) for k, b in enumerate(base))
                val += cov[i, j] * base[j] * mom[lower]
        mom[tuple(alpha)] = val
    return mom


@dataclass(frozen=True)
class JumpSpec:
    lambda0: float
    lambda1: np.ndarray
    moments: dict  # MultiIndex -> float, 2 <= |alpha| <= k_max
    distribution: JumpDistribution | None = None

    def intensity(self, x) -> np.ndarray:
        return self.lambda0 + np.asarray(x) @ self.lambda1


@dataclass(frozen=True)
class ModelSpec:
    n: int
    drift_const: np.ndarray
    drift_linear: np.ndarray
    diff_const: np.ndarray
    diff_linear: np.ndarray  # shape (n, n, n): diff_linear[i] multiplies x_i
    jumps: JumpSpec | None
    lo: np.ndarray
    hi: np.ndarray
    k_max: int = DEFAULT_K_MAX
    name: str = field(default="", compare=False)

    def diffusion(self, x) -> np.ndarray:
        return self.diff_const + np.tensordot(np.asarray(x, dtype=float), self.diff_linear, axes=1)

    def drift(self, x) -> np.ndarray:
        return self.drift_const + self.drift_linear @ np.asarray(x, dtype=float)

    def box_vertices(self) -> np.ndarray:
        grids = np.meshgrid(*[(l, h) for l, h in zip(self.lo, self.hi)], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    # -- serialisation ----------------------------------------------------

    def to_dict(self) -> dict:
        doc = {
            "dimension": self.n,
            "drift": {"const": self.drift_const.tolist(), "linear": self.drift_linear.tolist()},
            "diffusion": {"const": self.diff_const.tolist(), "linear": self.diff_linear.tolist()},
            "domain_box": {"lo": self.lo.tolist(), "hi": self.hi.tolist()},
            "k_max": self.k_max,
        }
        if self.name:
            doc["name"] = self.name
        if self.jumps is not None:
            j = self.jumps
            doc["jumps"] = {
                "lambda0": j.lambda0,
                "lambda1": j.lambda1.tolist(),
                "moments": [{"alpha": list(a), "value": v} for a, v in sorted(j.moments.items(), key=_gl_key)],
            }
            if j.distribution is not None:
                doc["jumps"]["distribution"] = j.distribution.to_dict()
        return doc

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "ModelSpec":
        if not isinstance(doc, dict):
            raise ModelSpecError("model document must be a JSON object")
        _check_keys(doc, {"dimension", "drift", "diffusion", "jumps", "domain_box", "k_max", "name"}, "model")
        try:
            n = int(doc["dimension"])
        except (KeyError, TypeError, ValueError):
            raise ModelSpecError("'dimension' must be a positive integer") from None
        if n < 1:
            raise ModelSpecError("'dimension' must be a positive integer")
        drift = doc.get("drift", {})
        diff = doc.get("diffusion", {})
        _check_keys(drift, {"const", "linear"}, "drift")
        _check_keys(diff, {"const", "linear"}, "diffusion")
        b0 = _arr(drift.get("const", [0.0] * n), (n,), "drift.const")
        B = _arr(drift.get("linear", np.zeros((n, n))), (n, n), "drift.linear")
        a0 = _arr(diff.get("const", np.zeros((n, n))), (n, n), "diffusion.const")
        a1 = _arr(diff.get("linear", np.zeros((n, n, n))), (n, n, n), "diffusion.linear")
        for name, mat in [("diffusion.const", a0)] + [(f"diffusion.linear[{i}]", a1[i]) for i in range(n)]:
            if not np.allclose(mat, mat.T, rtol=0, atol=1e-14):
                raise ModelSpecError(f"{name} is not symmetric")
        k_max = int(doc.get("k_max", DEFAULT_K_MAX))
        if k_max < 2:
            raise ModelSpecError("k_max must be >= 2")
        box = doc.get("domain_box", {"lo": [-1.0] * n, "hi": [1.0] * n})
        _check_keys(box, {"lo", "hi"}, "domain_box")
        lo = np.asarray(box.get("lo"), dtype=float).reshape(-1)
        hi = np.asarray(box.get("hi"), dtype=float).reshape(-1)
        if lo.shape != (n,) or hi.shape != (n,):
            raise ModelSpecError("domain_box.lo/hi must have length n")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > 0) or np.any(hi < 0):
            raise ModelSpecError("domain_box must contain the origin")
        jumps = None
        if doc.get("jumps") is not None:
            jumps = _parse_jumps(doc["jumps"], n, k_max)
        return cls(n, b0, B, a0, a1, jumps, lo, hi, k_max, str(doc.get("name", "")))

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelSpecError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)

    @classmethod
    def load(cls, path) -> "ModelSpec":
        return cls.from_json(Path(path).read_text())


def _gl_key(item):
    alpha = item[0]
    return (sum(alpha), tuple(-a for a in alpha))


def _parse_jumps(doc: dict, n: int, k_max: int) -> JumpSpec:
    _check_keys(doc, {"lambda0", "lambda1", "moments", "distribution"}, "jumps")
    lam0 = float(doc.get("lambda0", 0.0))
    lam1 = _arr(doc.get("lambda1", [0.0] * n), (n,), "jumps.lambda1")
    dist = None
    if doc.get("distribution") is not None:
        dist = JumpDistribution.from_dict(doc["distribution"], n)
    moments = {}
    for entry in doc.get("moments", []):
        alpha = MultiIndex(entry["alpha"])
        if len(alpha) != n:
            raise ModelSpecError(f"jumps.moments: alpha {list(alpha)} has wrong length")
        if alpha.order < 2:
            continue  # order 0/1 moments are absorbed by the compensator
        moments[alpha] = float(entry["value"])
    normal_cache = None
    for alpha in enumerate_multiindices(n, k_max):
        if alpha.order < 2 or alpha in moments:
            continue
        if dist is None:
            raise ModelSpecError(f"jumps.moments: moment {list(alpha)} missing below k_max={k_max}")
        if dist.kind == "normal":
            if normal_cache is None:
                normal_cache = _normal_moments(dist.mean, dist.cov, k_max)
            moments[alpha] = float(normal_cache[tuple(alpha)])
        else:
            moments[alpha] = dist.raw_moment(alpha)
    moments = {a: v for a, v in moments.items() if a.order <= k_max}
    second = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            second[i, j] = moments[MultiIndex(int(k == i) + int(k == j) for k in range(n))]
    if np.linalg.eigvalsh(second).min() < -1e-12 * max(1.0, np.abs(second).max()):
        raise ModelSpecError("jumps.moments: second-moment matrix is not positive semidefinite")
    for alpha, v in moments.items():
        if all(a % 2 == 0 for a in alpha) and sum(1 for a in alpha if a) == 1 and v < 0:
            raise ModelSpecError(f"jumps.moments: even pure moment {list(alpha)} is negative")
    return JumpSpec(lam0, lam1, moments, dist)
