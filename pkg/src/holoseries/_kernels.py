"""Hot loops: one numba kernel and one numpy fallback per operation.

The dispatchers at the bottom pick the implementation from ``_backend.active()``.
Both paths consume identical inputs, so results agree to rounding.
"""
from __future__ import annotations

import numpy as np

from . import _backend
from ._backend import njit

# ---------------------------------------------------------------------------
# One application of the generator to p(x) f_u(x) in coefficient space:
#   out_gamma = sum_beta C(gamma+beta, beta) p_{gamma+beta} b0_beta
#             + sum_kappa sum_beta C(gamma-kappa+beta, beta) p_{gamma-kappa+beta} b1_{beta,kappa}
# ---------------------------------------------------------------------------


@njit(nogil=True)
def _apply_symbol_numba(p, deg_p, b0, b1, add_idx, add_binom, sub_unit, orders, out_size):
    n = sub_unit.shape[1]
    nk = min(b0.shape[0], add_idx.shape[1])
    out = np.zeros(out_size, dtype=np.complex128)
    for gi in range(out_size):
        acc = 0j
        if orders[gi] <= deg_p:
            for bj in range(nk):
                d = add_idx[gi, bj]
                if d < 0 or orders[d] > deg_p:
                    break
                acc += add_binom[gi, bj] * p[d] * b0[bj]
        for k in range(n):
            gm = sub_unit[gi, k]
            if gm < 0:
                continue
            for bj in range(nk):
                d = add_idx[gm, bj]
                if d < 0 or orders[d] > deg_p:
                    break
                acc += add_binom[gm, bj] * p[d] * b1[bj, k]
        out[gi] = acc
    return out


def _apply_symbol_numpy(p, deg_p, b0, b1, add_idx, add_binom, sub_unit, orders, out_size):
    # p is zero above deg_p, so no order cut is needed; index -1 hits the zero pad
    nk = min(b0.shape[0], add_idx.shape[1])
    b0 = b0[:nk]
    b1 = b1[:nk]
    padded = np.zeros(add_idx.shape[0] + 1, dtype=p.dtype)
    padded[: len(p)] = p
    src = add_idx[:out_size, :nk]
    out = (add_binom[:out_size, :nk] * padded[src] * b0[None, :]).sum(axis=1)
    for k in range(sub_unit.shape[1]):
        gm = sub_unit[:out_size, k]
        ok = gm >= 0
        idx = np.where(ok[:, None], add_idx[np.maximum(gm, 0), :nk], -1)
        w = np.where(ok[:, None], add_binom[np.maximum(gm, 0), :nk], 0.0)
        out = out + (w * padded[idx] * b1[None, :, k]).sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# Polynomial product c = a * b truncated to out_size
# ---------------------------------------------------------------------------


@njit(nogil=True)
def _poly_mul_numba(a, b, add_idx, out_size):
    out = np.zeros(out_size, dtype=np.complex128)
    for i in range(a.shape[0]):
        ai = a[i]
        if ai == 0:
            continue
        for j in range(b.shape[0]):
            t = add_idx[i, j]
            if t < 0:
                break
            if t < out_size:
                out[t] += ai * b[j]
    return out


def _poly_mul_numpy(a, b, add_idx, out_size):
    idx = add_idx[: len(a), : len(b)]
    prod = a[:, None] * b[None, :]
    ok = (idx >= 0) & (idx < out_size)
    out = np.zeros(out_size, dtype=prod.dtype)
    np.add.at(out, idx[ok], prod[ok])
    return out


# ---------------------------------------------------------------------------
# One Euler-Maruyama step with thinned affine-intensity jumps (in place).
# ---------------------------------------------------------------------------


@njit(nogil=True)
def _mc_step_numba(x, dt, b0, B, a0, a1, lam0, lam1, mean_jump, lam_bar,
                   normals, n_cand, cand_u, cand_z, chol):
    n_paths, n = x.shape
    sqdt = np.sqrt(dt)
    clamps = 0
    off = 0
    xi = np.empty(n)
    for p in range(n_paths):
        for k in range(n):
            xi[k] = x[p, k]
        lam = lam0
        for k in range(n):
            lam += lam1[k] * xi[k]
        if lam < 0.0:
            lam = 0.0
            clamps += 1
        # clamped Cholesky of a(x) = a0 + sum_i x_i a1[i]
        for i in range(n):
            for j in range(n):
                chol[i, j] = 0.0
        for j in range(n):
            s = a0[j, j]
            for m in range(n):
                s += xi[m] * a1[m, j, j]
            for m in range(j):
                s -= chol[j, m] * chol[j, m]
            if s <= 0.0:
                if s < 0.0:
                    clamps += 1
                continue
            piv = np.sqrt(s)
            chol[j, j] = piv
            for i in range(j + 1, n):
                t = a0[i, j]
                for m in range(n):
                    t += xi[m] * a1[m, i, j]
                for m in range(j):
                    t -= chol[i, m] * chol[j, m]
                chol[i, j] = t / piv
        for k in range(n):
            drift = b0[k] - lam * mean_jump[k]
            for m in range(n):
                drift += B[k, m] * xi[m]
            diff = 0.0
            for m in range(k + 1):
                diff += chol[k, m] * normals[p, m]
            x[p, k] = xi[k] + drift * dt + diff * sqdt
        for c in range(n_cand[p]):
            if cand_u[off + c] * lam_bar < lam:
                for k in range(n):
                    x[p, k] += cand_z[off + c, k]
        off += n_cand[p]
    return clamps


def _mc_step_numpy(x, dt, b0, B, a0, a1, lam0, lam1, mean_jump, lam_bar,
                   normals, n_cand, cand_u, cand_z, chol):
    n_paths, n = x.shape
    xi = x.copy()
    lam = lam0 + xi @ lam1 if n > 0 else np.full(n_paths, lam0)
    neg = lam < 0.0
    lam = np.where(neg, 0.0, lam)
    clamps = int(neg.sum())
    a = a0[None, :, :] + np.einsum("pm,mij->pij", xi, a1)
    L = np.zeros((n_paths, n, n))
    for j in range(n):
        s = a[:, j, j] - (L[:, j, :j] ** 2).sum(axis=1)
        clamps += int((s < 0.0).sum())
        ok = s > 0.0
        piv = np.sqrt(np.where(ok, s, 1.0))
        L[:, j, j] = np.where(ok, piv, 0.0)
        for i in range(j + 1, n):
            t = a[:, i, j] - (L[:, i, :j] * L[:, j, :j]).sum(axis=1)
            L[:, i, j] = np.where(ok, t / piv, 0.0)
    drift = b0[None, :] - lam[:, None] * mean_jump[None, :] + xi @ B.T
    diff = np.einsum("pkm,pm->pk", L, normals)
    x[:] = xi + drift * dt + diff * np.sqrt(dt)
    if len(cand_u):
        owner = np.repeat(np.arange(n_paths), n_cand)
        accept = cand_u * lam_bar < lam[owner]
        for k in range(n):
            x[:, k] += np.bincount(owner[accept], weights=cand_z[accept, k], minlength=n_paths)
    return clamps


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def apply_symbol(*args):
    if _backend.active() == "numba":
        return _apply_symbol_numba(*args)
    return _apply_symbol_numpy(*args)


def poly_mul(*args):
    if _backend.active() == "numba":
        return _poly_mul_numba(*args)
    return _poly_mul_numpy(*args)


def mc_step(*args):
    if _backend.active() == "numba":
        return _mc_step_numba(*args)
    return _mc_step_numpy(*args)
