"""Singular values of small dense matrices by one-sided (Hestenes) Jacobi.

Works on a single (d, d) matrix or a stack (B, d, d); the stack is rotated in
lock-step so a whole tree level is handled with a few vectorized sweeps.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

MAX_DIM = 16
TOL = 1e-12
MAX_SWEEPS = 80


def singular_values(a, tol: float = TOL) -> np.ndarray:
    """Singular values in descending order along the last axis."""
    a = np.array(a, dtype=float, copy=True)
    single = a.ndim == 2
    if single:
        a = a[None]
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise DimensionError(f"expected square matrices, got shape {a.shape}")
    d = a.shape[-1]
    if d > MAX_DIM:
        raise DimensionError(f"d = {d} exceeds the supported maximum {MAX_DIM}")
    if d > 1:
        _jacobi_sweeps(a, tol)
    sv = np.sqrt(np.einsum("bij,bij->bj", a, a))
    sv = -np.sort(-sv, axis=-1)
    return sv[0] if single else sv


def _jacobi_sweeps(a: np.ndarray, tol: float) -> None:
    d = a.shape[-1]
    pairs = [(i, j) for i in range(d - 1) for j in range(i + 1, d)]
    for _ in range(MAX_SWEEPS):
        rotated = False
        for i, j in pairs:
            ai = a[:, :, i]
            aj = a[:, :, j]
            alpha = np.einsum("bk,bk->b", ai, ai)
            beta = np.einsum("bk,bk->b", aj, aj)
            gamma = np.einsum("bk,bk->b", ai, aj)
            active = np.abs(gamma) > tol * np.sqrt(alpha * beta)
            if not active.any():
                continue
            rotated = True
            g = np.where(active, gamma, 1.0)
            with np.errstate(over="ignore", divide="ignore"):
                zeta = (beta - alpha) / (2.0 * g)
                big = np.abs(zeta) > 1e150
                zs = np.where(big, 1.0, zeta)
                t = np.sign(zs) / (np.abs(zs) + np.sqrt(1.0 + zs * zs))
                # tan of a tiny rotation angle, without squaring zeta
                t = np.where(big, 0.5 / zeta, t)
            t = np.where(zeta == 0.0, 1.0, t)
            t = np.where(active, t, 0.0)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = c * t
            new_i = c[:, None] * ai - s[:, None] * aj
            new_j = s[:, None] * ai + c[:, None] * aj
            a[:, :, i] = new_i
            a[:, :, j] = new_j
        if not rotated:
            return


def op_norm(a) -> float | np.ndarray:
    """Largest singular value."""
    return singular_values(a)[..., 0]
