"""Matrix cocycles over a map family: generator evaluation, overflow-safe
products and extremal singular-value logs.

A product is stored as ``exp(log_scale) * core``. Because a single scale
cannot hold a product whose condition number leaves the float range (think
diag(2, 1/2)**10000), cocycle products also carry the inverse product
``L(x_0)^-1 ... L(x_{n-1})^-1`` in the same scaled form; the smallest
singular value is read off as 1 / (largest singular value of the inverse),
and the accumulated product itself is never inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import MapFamily, _check_point
from .errors import DimensionError, SingularityError
from .expr import Expression
from .svd import MAX_DIM, singular_values
from .words import Word

DET_FLOOR = 1e-300
RENORM_LO = 1e-8
RENORM_HI = 1e8


# -- generators -------------------------------------------------------------


@dataclass(frozen=True)
class CocycleGenerator:
    """An evaluable map L: [0, 1) -> GL_d(R).

    kinds: "constant" (one matrix), "piecewise_constant" (matrix per half-open
    cell [a_i, a_{i+1})), "parametric" (entry-wise expressions in x).
    """

    kind: str
    d: int
    matrices: tuple = ()
    breakpoints: tuple[float, ...] = ()
    expressions: tuple = ()
    det_floor: float = DET_FLOOR
    _inverses: tuple = field(default=(), repr=False, compare=False)
    _logdets: tuple = field(default=(), repr=False, compare=False)

    @classmethod
    def constant(cls, matrix, det_floor: float = DET_FLOOR) -> CocycleGenerator:
        m = _as_square(matrix)
        inv, ld = _checked_inverse(m, det_floor)
        return cls("constant", m.shape[0], (m,), (), (), det_floor, (inv,), (ld,))

    @classmethod
    def piecewise_constant(cls, breakpoints, matrices, det_floor: float = DET_FLOOR) -> CocycleGenerator:
        b = tuple(float(v) for v in breakpoints)
        if len(b) < 2 or b[0] != 0.0 or b[-1] != 1.0 or any(u >= v for u, v in zip(b, b[1:])):
            raise ValueError("breakpoints must increase strictly from 0 to 1")
        ms = tuple(_as_square(m) for m in matrices)
        if len(ms) != len(b) - 1:
            raise ValueError("need one matrix per cell")
        if len({m.shape for m in ms}) != 1:
            raise DimensionError("all cell matrices must share a shape")
        pairs = [_checked_inverse(m, det_floor) for m in ms]
        return cls("piecewise_constant", ms[0].shape[0], ms, b, (), det_floor,
                   tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    @classmethod
    def parametric(cls, entries, det_floor: float = DET_FLOOR) -> CocycleGenerator:
        """``entries`` is a row-major nested list of expressions (str or number)."""
        rows = [[Expression(str(e)) for e in row] for row in entries]
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise DimensionError("parametric generator must be square")
        if d > MAX_DIM:
            raise DimensionError(f"d = {d} exceeds {MAX_DIM}")
        return cls("parametric", d, (), (), tuple(tuple(r) for r in rows), det_floor)

    def describe(self) -> dict:
        out = {"kind": self.kind, "d": self.d}
        if self.kind == "constant":
            out["matrix"] = self.matrices[0].tolist()
        elif self.kind == "piecewise_constant":
            out["breakpoints"] = list(self.breakpoints)
            out["matrices"] = [m.tolist() for m in self.matrices]
        else:
            out["entries"] = [[e.text for e in row] for row in self.expressions]
        return out


def _as_square(matrix) -> np.ndarray:
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise DimensionError(f"d = {m.shape[0]} exceeds {MAX_DIM}")
    return m


def _checked_inverse(m: np.ndarray, det_floor: float):
    det = np.linalg.det(m)
    if not abs(det) > det_floor:
        raise SingularityError(f"|det| = {abs(det):.3g} <= det_floor {det_floor:g}")
    return np.linalg.inv(m), math.log(abs(det))


def eval_generator(L: CocycleGenerator, x: float) -> np.ndarray:
    _check_point(x)
    mats, _, _ = eval_generator_array(L, np.array([x]))
    return mats[0]


def eval_generator_array(L: CocycleGenerator, xs):
    """Matrices, inverses and log|det| at every point of ``xs``.

    Returns arrays of shapes (B, d, d), (B, d, d), (B,).
    """
    xs = np.asarray(xs, dtype=float)
    B = xs.shape[0]
    if L.kind == "constant":
        m, inv, ld = L.matrices[0], L._inverses[0], L._logdets[0]
        return (np.broadcast_to(m, (B, L.d, L.d)), np.broadcast_to(inv, (B, L.d, L.d)),
                np.full(B, ld))
    if L.kind == "piecewise_constant":
        cell = np.searchsorted(L.breakpoints, xs, side="right") - 1
        stack = np.stack(L.matrices)
        inv = np.stack(L._inverses)
        return stack[cell], inv[cell], np.asarray(L._logdets)[cell]
    mats = np.empty((B, L.d, L.d))
    for i, row in enumerate(L.expressions):
        for j, e in enumerate(row):
            mats[:, i, j] = e(xs)
    sign, logdet = np.linalg.slogdet(mats)
    bad = (sign == 0) | (logdet <= math.log(L.det_floor))
    if bad.any():
        k = int(np.argmax(bad))
        raise SingularityError(f"generator singular at x = {xs[k]!r} (|det| <= {L.det_floor:g})")
    return mats, np.linalg.inv(mats), logdet


# -- scaled products ----------------------------------------------------------


@dataclass(frozen=True)
class NormPair:
    log_smax: float
    log_smin: float


@dataclass(frozen=True)
class ScaledMatrix:
    """Semantic value ``exp(log_scale) * core``.

    ``inv_core``/``inv_log_scale`` optionally hold the inverse of the semantic
    value in the same form, and ``log_abs_det`` its accumulated log|det|.
    """

    core: np.ndarray
    log_scale: float = 0.0
    inv_core: np.ndarray | None = None
    inv_log_scale: float = 0.0
    log_abs_det: float | None = None

    @classmethod
    def identity(cls, d: int) -> ScaledMatrix:
        return cls(np.eye(d), 0.0, np.eye(d), 0.0, 0.0)

    @classmethod
    def from_matrix(cls, m) -> ScaledMatrix:
        m = _as_square(m)
        core, scale = _renormalize(m, 0.0)
        return cls(core, scale)

    @property
    def d(self) -> int:
        return self.core.shape[0]

    def value(self) -> np.ndarray:
        """The unscaled matrix; overflows for long products."""
        return math.exp(self.log_scale) * self.core

    def rescaled(self, c: float) -> ScaledMatrix:
        """Same semantic value with the core multiplied by c."""
        return ScaledMatrix(self.core * c, self.log_scale - math.log(c), self.inv_core,
                            self.inv_log_scale, self.log_abs_det)


def _renormalize(core: np.ndarray, log_scale: float):
    d = core.shape[-1]
    f = math.sqrt(float(np.einsum("ij,ij->", core, core)))
    if math.sqrt(d) * RENORM_LO <= f <= RENORM_HI:
        return core, log_scale
    if not math.isfinite(f) or f == 0.0:
        raise SingularityError("scaled product degenerated (zero or non-finite core)")
    s = float(singular_values(core)[0])
    return core / s, log_scale + math.log(s)


def _renormalize_batch(cores: np.ndarray, log_scales: np.ndarray):
    d = cores.shape[-1]
    f = np.sqrt(np.einsum("bij,bij->b", cores, cores))
    out = (f < math.sqrt(d) * RENORM_LO) | (f > RENORM_HI)
    if not out.any():
        return cores, log_scales
    if not np.all(np.isfinite(f[out])) or np.any(f[out] == 0.0):
        raise SingularityError("scaled product degenerated (zero or non-finite core)")
    s = singular_values(cores[out])[:, 0]
    cores = cores.copy()
    log_scales = log_scales.copy()
    cores[out] /= s[:, None, None]
    log_scales[out] += np.log(s)
    return cores, log_scales


def scaled_multiply(p: ScaledMatrix, m, m_inv=None, m_logdet: float | None = None) -> ScaledMatrix:
    """m @ p, renormalized. If p tracks its inverse, so does the result."""
    m = np.asarray(m, dtype=float)
    if m.shape != p.core.shape:
        raise DimensionError(f"shape mismatch {m.shape} vs {p.core.shape}")
    core, scale = _renormalize(m @ p.core, p.log_scale)
    inv_core, inv_scale, logdet = None, 0.0, None
    if p.inv_core is not None:
        if m_inv is None:
            inv_core = np.linalg.solve(m.T, p.inv_core.T).T
        else:
            inv_core = p.inv_core @ m_inv
        inv_core, inv_scale = _renormalize(inv_core, p.inv_log_scale)
    if p.log_abs_det is not None:
        if m_logdet is None:
            _, m_logdet = np.linalg.slogdet(m)
        logdet = p.log_abs_det + float(m_logdet)
    return ScaledMatrix(core, scale, inv_core, inv_scale, logdet)


def norms(p: ScaledMatrix) -> NormPair:
    """log of the largest and smallest singular values of the semantic value."""
    if p.d > MAX_DIM:
        raise DimensionError(f"d = {p.d} exceeds {MAX_DIM}")
    sv = singular_values(p.core)
    log_smax = p.log_scale + math.log(sv[0])
    if p.inv_core is not None:
        log_smin = -(p.inv_log_scale + math.log(singular_values(p.inv_core)[0]))
    else:
        log_smin = p.log_scale + math.log(sv[-1]) if sv[-1] > 0 else -math.inf
    return NormPair(log_smax, log_smin)


def norms_batch(cores, log_scales, inv_cores, inv_log_scales):
    """Vectorized :func:`norms` for stacks of tracked products."""
    smax = singular_values(cores)[:, 0]
    imax = singular_values(inv_cores)[:, 0]
    return log_scales + np.log(smax), -(inv_log_scales + np.log(imax))


# -- cocycle products along words ---------------------------------------------


def cocycle_along(family: MapFamily, L: CocycleGenerator, w: Word, x: float) -> ScaledMatrix:
    """L_w(x) = L(x_{n-1}) ... L(x_1) L(x_0) along the orbit driven by w."""
    _check_point(x)
    acc = CocycleAccumulator(L.d)
    for j in w:
        m, inv, ld = _eval_one(L, x)
        acc.push(m, inv, ld)
        x = float(family.map(j)(x))
    return acc.snapshot()


def _eval_one(L: CocycleGenerator, x: float):
    if L.kind == "constant":
        return L.matrices[0], L._inverses[0], L._logdets[0]
    if L.kind == "piecewise_constant":
        c = int(np.searchsorted(L.breakpoints, x, side="right")) - 1
        return L.matrices[c], L._inverses[c], L._logdets[c]
    m, inv, ld = eval_generator_array(L, np.array([x]))
    return m[0], inv[0], float(ld[0])


class CocycleAccumulator:
    """Mutable running product used by the sequential estimators.

    ``push`` left-multiplies one factor; ``snapshot`` freezes the current state
    into a :class:`ScaledMatrix`.
    """

    def __init__(self, d: int):
        self.core = np.eye(d)
        self.log_scale = 0.0
        self.inv_core = np.eye(d)
        self.inv_log_scale = 0.0
        self.log_abs_det = 0.0
        self.steps = 0

    def push(self, m, m_inv, m_logdet: float):
        self.core, self.log_scale = _renormalize(m @ self.core, self.log_scale)
        self.inv_core, self.inv_log_scale = _renormalize(self.inv_core @ m_inv, self.inv_log_scale)
        self.log_abs_det += m_logdet
        self.steps += 1

    def snapshot(self) -> ScaledMatrix:
        return ScaledMatrix(self.core.copy(), self.log_scale, self.inv_core.copy(),
                            self.inv_log_scale, self.log_abs_det)
