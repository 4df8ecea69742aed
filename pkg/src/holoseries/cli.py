"""Command-line front end: expand, eval, compare, identities, mc."""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import random
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _backend
from .generator import build_generator
from .log_affine import log_affine_eval, rho_sequence
from .mc_oracle import SDEModel, mc_char_fn, simulate_paths
from .modelspec import ModelSpec, ModelSpecError
from .multiindex import (
    StirlingTable,
    check_derivative_identity,
    check_factorial_shift_identity,
    rising_factorial_poly,
    stirling_unsigned,
)
from .riccati_oracle import char_fn_riccati, solve_riccati
from .series_engine import (
    calibrated_eta,
    g_sequence,
    g_sequence_hp,
    h_sequence,
    q_series_eval,
    select_eta,
    taylor_eval,
    verify_qsys,
)

METHODS = ("taylor", "qseries", "logaffine", "riccati", "mc")
DIGITS = ".17g"


class CLIError(Exception):
    pass


# ---------------------------------------------------------------------------
# Grid parsing
# ---------------------------------------------------------------------------


def parse_axis(text: str) -> np.ndarray:
    """'v' or 'start:stop:count'."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise CLIError(f"bad range {text!r}; expected start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise CLIError(f"bad range {text!r}; count must be >= 1")
        return np.linspace(start, stop, count)
    return np.array([float(text)])


def parse_grid(text: str, n: int, what: str) -> np.ndarray:
    """Comma-separated axis specs; a single spec is broadcast to every axis."""
    try:
        axes = [parse_axis(t) for t in text.split(",")]
    except ValueError as exc:
        raise CLIError(f"--{what}: {exc}") from None
    if len(axes) == 1 and n > 1:
        axes = axes * n
    if len(axes) != n:
        raise CLIError(f"--{what} needs {n} axes, got {len(axes)}")
    return np.array(list(itertools.product(*axes)), dtype=float)


def parse_s(text: str) -> np.ndarray:
    vals = np.concatenate([parse_axis(t) for t in text.split(",")])
    if np.any(vals < 0):
        raise CLIError("--s values must be >= 0")
    return vals


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


@dataclass
class Options:
    eta: float | None = None
    eta_mode: str = "ru"
    rmax: int = 60
    tol: float = 1e-14
    seed: int = 0
    paths: int = 200_000
    dt: float | None = None
    rtol: float = 1e-9
    hp: bool = False


@dataclass
class Row:
    s: float
    x: np.ndarray
    u: np.ndarray
    value: complex
    method: str
    n_terms: int
    tail: float
    status: str = "ok"
    stderr: float = 0.0


def load_model(path: str) -> ModelSpec:
    """A JSON file, or the name of a built-in model."""
    from . import models

    builtin = {**models.CANONICAL, "zero": models.zero_model, "affine_jump_1d": models.affine_jump_1d,
               "gaussian_2d": models.gaussian_2d, "heston_like_2d": models.heston_like_2d}
    if path in builtin and not os.path.exists(path):
        return builtin[path]()
    try:
        return ModelSpec.load(path)
    except FileNotFoundError:
        raise CLIError(f"model file not found: {path}") from None
    except ModelSpecError as exc:
        raise CLIError(f"{path}: {exc}") from None


def flip_drift(spec: ModelSpec) -> ModelSpec:
    """Negative-control model: drift sign reversed."""
    return replace(spec, drift_const=-spec.drift_const, drift_linear=-spec.drift_linear)


def choose_eta(gen, u, opts: Options, s_max: float) -> tuple[float, str]:
    if opts.eta is not None:
        return float(opts.eta), "override"
    if gen.is_zero():
        return 1.0, "trivial"
    if opts.eta_mode == "calibrated":
        sel = calibrated_eta(gen, u, r_max=min(opts.rmax, 40))
        return sel.eta, "calibrated"
    sol = solve_riccati(gen, u, max(s_max, 1e-3), opts.rtol)
    sel = select_eta(gen, u, riccati=sol)
    return sel.eta, sel.source


def _eval_u(spec: ModelSpec, method: str, u, s_vals, x_pts, opts: Options) -> list[Row]:
    gen = build_generator(spec)
    rows = []
    s_max = float(np.max(s_vals))

    def add(s, x, val, n_terms, tail, status="ok", stderr=0.0):
        rows.append(Row(float(s), x, u, complex(val), method, int(n_terms), float(tail), status, stderr))

    if method == "taylor":
        g = g_sequence_hp(gen, u, opts.rmax) if opts.hp else g_sequence(gen, u, opts.rmax)
        for s in s_vals:
            for x in x_pts:
                r = taylor_eval(g, x, s, opts.tol)
                add(s, x, r.value, r.n_terms, r.tail_estimate, "ok" if r.converged else "not-converged")
    elif method in ("qseries", "logaffine"):
        eta, _ = choose_eta(gen, u, opts, s_max)
        h = h_sequence(gen, u, eta, opts.rmax)
        rho = rho_sequence(h, affine_tol=None) if method == "logaffine" else None
        for s in s_vals:
            for x in x_pts:
                r = q_series_eval(h, eta, x, s, opts.tol) if rho is None else log_affine_eval(rho, x, s, opts.tol)
                status = "ok" if r.converged else "not-converged"
                if r.diverging:
                    status += ";growing-terms"
                add(s, x, r.value, r.n_terms, r.tail_estimate, status)
    elif method == "riccati":
        sol = solve_riccati(gen, u, max(s_max, 1e-3), opts.rtol)
        for s in s_vals:
            for x in x_pts:
                try:
                    add(s, x, char_fn_riccati(sol, x, s), len(sol.grid), 0.0)
                except ValueError as exc:
                    add(s, x, complex(math.nan, math.nan), 0, math.nan, f"error: {exc}")
    elif method == "mc":
        model = SDEModel.from_spec(spec)
        for s in s_vals:
            for x in x_pts:
                dt = opts.dt if opts.dt is not None else (s / 512 if s > 0 else None)
                term = simulate_paths(model, x, s, opts.paths, dt, opts.seed)
                est = mc_char_fn(term, u)
                add(s, x, est.value, est.n_paths, est.stderr, "ok", est.stderr)
    else:
        raise CLIError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return rows


def evaluate_grid(spec: ModelSpec, method: str, s_vals, x_pts, u_pts, opts: Options) -> list[Row]:
    """Rows ordered by (u, s, x) whatever the execution order."""
    jobs = [np.asarray(u, dtype=float) for u in u_pts]
    workers = min(_backend.thread_cap(), len(jobs))
    # engine warnings are reported per row through the status column
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if workers > 1 and method != "mc":
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(lambda u: _eval_u(spec, method, u, s_vals, x_pts, opts), jobs))
        else:
            parts = [_eval_u(spec, method, u, s_vals, x_pts, opts) for u in jobs]
    return [row for part in parts for row in part]


def _fmt(v: float) -> str:
    return format(float(v), DIGITS)


def result_header(n: int) -> list[str]:
    return (["s"] + [f"x_{i + 1}" for i in range(n)] + [f"u_{i + 1}" for i in range(n)]
            + ["re_phat", "im_phat", "method", "n_terms", "tail_estimate", "status"])


def row_cells(row: Row) -> list[str]:
    return ([_fmt(row.s)] + [_fmt(v) for v in row.x] + [_fmt(v) for v in row.u]
            + [_fmt(row.value.real), _fmt(row.value.imag), row.method, str(row.n_terms),
               _fmt(row.tail), row.status])


def _open_out(path):
    return open(path, "w", newline="") if path else _Stdout()


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        return False


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _terms_json(poly) -> list:
    return [{"alpha": list(a), "re": v.real, "im": v.imag} for a, v in poly.terms().items()]


def cmd_expand(args) -> int:
    spec = load_model(args.model)
    gen = build_generator(spec)
    u = parse_grid(args.u, spec.n, "u")[0]
    opts = _options(args)
    eta, source = choose_eta(gen, u, opts, args.s_ref)
    g = g_sequence(gen, u, args.rmax)
    h = h_sequence(gen, u, eta, args.rmax)
    rho = rho_sequence(h, affine_tol=None)
    doc = {
        "model": spec.name,
        "u": u.tolist(),
        "eta": eta,
        "eta_source": source,
        "g": [_terms_json(p) for p in g],
        "h": [_terms_json(p) for p in h],
        "rho0": [[v.real, v.imag] for v in rho.rho0],
        "rho1": [[[v.real, v.imag] for v in row] for row in rho.rho1],
        "affinity_residuals": rho.affinity_residuals.tolist(),
        "truncated": g.truncated or h.truncated,
    }
    text = json.dumps(doc, indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _options(args) -> Options:
    return Options(eta=args.eta, eta_mode=args.eta_mode, rmax=args.rmax, tol=args.series_tol
                   if getattr(args, "series_tol", None) is not None else args.tol,
                   seed=args.seed, paths=args.paths, dt=args.dt, rtol=args.rtol, hp=args.hp)


def _grids(args, spec):
    return parse_s(args.s), parse_grid(args.x, spec.n, "x"), parse_grid(args.u, spec.n, "u")


def cmd_eval(args) -> int:
    spec = load_model(args.model)
    s_vals, x_pts, u_pts = _grids(args, spec)
    rows = evaluate_grid(spec, args.method, s_vals, x_pts, u_pts, _options(args))
    with _open_out(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(result_header(spec.n))
        for row in rows:
            w.writerow(row_cells(row))
    return 0


def cmd_mc(args) -> int:
    args.method = "mc"
    return cmd_eval(args)


def cmd_compare(args) -> int:
    spec = load_model(args.model)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if len(methods) < 2:
        raise CLIError("--methods needs at least two methods")
    for m in methods:
        if m not in METHODS:
            raise CLIError(f"unknown method {m!r}")
    s_vals, x_pts, u_pts = _grids(args, spec)
    opts = _options(args)
    results = {}
    for m in methods:
        model = flip_drift(spec) if args.perturb_drift == m else spec
        results[m] = evaluate_grid(model, m, s_vals, x_pts, u_pts, opts)
    ref = methods[0]
    worst = {}
    bad = {}
    failed = False
    with _open_out(args.out) as fh:
        w = csv.writer(fh)
        w.writerow(result_header(spec.n) + ["reference", "abs_diff", "allowed", "pass"])
        for m in methods[1:]:
            worst[m] = 0.0
            bad[m] = False
            for a, b in zip(results[ref], results[m]):
                diff = abs(a.value - b.value)
                allowed = args.tol + 3.0 * (a.stderr + b.stderr)
                ok = bool(diff <= allowed) and "error" not in b.status and "error" not in a.status
                failed |= not ok
                bad[m] |= not ok
                worst[m] = max(worst[m], diff) if math.isfinite(diff) else math.inf
                w.writerow(row_cells(b) + [ref, _fmt(diff), _fmt(allowed), "pass" if ok else "FAIL"])
    for m, d in worst.items():
        print(f"{ref} vs {m}: max |diff| = {d:.3e} (tol {args.tol:g}) -> {'FAIL' if bad[m] else 'ok'}",
              file=sys.stderr)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Identity suite
# ---------------------------------------------------------------------------


@dataclass
class IdentityResult:
    name: str
    passed: bool
    detail: str


def run_identities(k_max: int, stirling: StirlingTable | None = None, seed: int = 0) -> list[IdentityResult]:
    """Stirling row sums and generating identity, the two alternating-sum identities, q-system."""
    out = []
    table = stirling or stirling_unsigned(max(k_max, 0))
    ok = all(sum(table[k]) == math.factorial(k) for k in range(k_max + 1))
    out.append(IdentityResult("stirling-row-sums", ok, f"k <= {k_max}"))
    rng = random.Random(seed)
    worst = 0.0
    for k in range(k_max + 1):
        for _ in range(20):
            z = rng.uniform(-2, 2)
            poly = sum(float(c) * z**r for r, c in enumerate(table[k]))
            worst = max(worst, abs(rising_factorial_poly(k, z) - poly) / math.factorial(k))
    out.append(IdentityResult("stirling-generating", worst <= 1e-9, f"max scaled residual {worst:.2e}"))
    ok = all(check_derivative_identity(k) for k in range(k_max + 1))
    out.append(IdentityResult("derivative-identity", ok, f"k <= {k_max}, exact"))
    exact_ok = True
    worst = 0.0
    for k in range(1, min(k_max, 8) + 1):
        exact_ok &= all(check_factorial_shift_identity(k, x) == 0 for x in range(-k, 1))
        for _ in range(50):
            x = rng.uniform(-5, 5)
            worst = max(worst, check_factorial_shift_identity(k, x) / math.factorial(k + 1))
    out.append(IdentityResult("factorial-shift-identity", exact_ok and worst <= 1e-9,
                              f"integer nodes exact={exact_ok}, random max scaled {worst:.2e}"))
    if k_max >= 1:
        from . import models

        worst = 0.0
        for spec in (models.brownian(), models.ornstein_uhlenbeck()):
            gen = build_generator(spec)
            kk = min(k_max, 20)
            h = h_sequence(gen, [1.0], 1.3, kk)
            g = g_sequence(gen, [1.0], kk)
            worst = max(worst, verify_qsys(h, g, 1.3, kk, gen))
        if stirling is not None:
            # the q-system check runs through the supplied table as well
            from .series_engine import q_from_stirling

            for k in range(min(k_max, table.k_max) + 1):
                q = q_from_stirling(g, table, 1.3, k)
                worst = max(worst, abs(q([0.3]) - h[k]([0.3])) / (1 + abs(h[k]([0.3]))))
        out.append(IdentityResult("q-system", worst <= 1e-10, f"max normalized residual {worst:.2e}"))
    return out


def cmd_identities(args) -> int:
    results = run_identities(args.kmax)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    return 0 if all(r.passed for r in results) else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _common(p, grid: bool = True):
    p.add_argument("--model", required=True, help="model JSON file or built-in name")
    p.add_argument("--u", default="1", help="u per axis: value or start:stop:count, comma-separated")
    if grid:
        p.add_argument("--s", default="0:1:5", help="s values: value or start:stop:count")
        p.add_argument("--x", default="0", help="x per axis: value or start:stop:count, comma-separated")
    p.add_argument("--eta", type=float, default=None, help="override eta")
    p.add_argument("--eta-mode", choices=("ru", "calibrated"), default="ru")
    p.add_argument("--rmax", type=int, default=60, help="number of series coefficients")
    p.add_argument("--tol", type=float, default=1e-14, help="series stopping tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--paths", type=int, default=200_000, help="Monte Carlo paths")
    p.add_argument("--dt", type=float, default=None, help="Monte Carlo step (default s/512)")
    p.add_argument("--rtol", type=float, default=1e-9, help="ODE relative tolerance")
    p.add_argument("--hp", action="store_true", help="extended-precision Taylor coefficients")
    p.add_argument("--out", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holoseries", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", help="dump g, h and log coefficients as JSON")
    _common(p, grid=False)
    p.add_argument("--s-ref", type=float, default=1.0, help="horizon used to estimate d* for eta")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("eval", help="evaluate one method on a grid, CSV out")
    _common(p)
    p.add_argument("--method", choices=METHODS, default="qseries")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="compare methods on a grid; exit 1 on any violation")
    _common(p)
    p.set_defaults(func=cmd_compare)
    p.add_argument("--methods", default="qseries,riccati")
    p.add_argument("--series-tol", type=float, default=1e-14, help="series stopping tolerance")
    p.add_argument("--perturb-drift", default=None, metavar="METHOD",
                   help="negative control: flip the drift sign for this method only")

    p = sub.add_parser("identities", help="run the exact identity suite")
    p.add_argument("--kmax", type=int, default=15)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("mc", help="Monte Carlo estimate on a grid (same as eval --method mc)")
    _common(p)
    p.set_defaults(func=cmd_mc)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
