"""Map families on the phase space [0, 1) and word-driven orbits."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .words import Word, WordSource


def mod1(y):
    """y - floor(y), with a rounding result of exactly 1.0 clamped to 0.0."""
    r = y - np.floor(y)
    if np.ndim(r):
        r[r >= 1.0] = 0.0
        return r
    r = float(r)
    return 0.0 if r >= 1.0 else r


def _as_breakpoint(value) -> float:
    return float(Fraction(str(value)))


@dataclass(frozen=True)
class PiecewiseAffineMap:
    """x -> (slope_i * x + offset_i) mod 1 on the cell [b_i, b_{i+1})."""

    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    offsets: tuple[float, ...]

    def __post_init__(self):
        b = self.breakpoints
        if len(b) < 2 or b[0] != 0.0 or b[-1] != 1.0 or any(u >= v for u, v in zip(b, b[1:])):
            raise ValueError("breakpoints must increase strictly from 0 to 1")
        if not len(self.slopes) == len(self.offsets) == len(b) - 1:
            raise ValueError("need one slope and one offset per cell")

    def __call__(self, x):
        cell = np.searchsorted(self.breakpoints, x, side="right") - 1
        slopes = np.asarray(self.slopes)[cell]
        offsets = np.asarray(self.offsets)[cell]
        return mod1(slopes * x + offsets)

    @property
    def degree(self) -> int:
        widths = np.diff(self.breakpoints)
        return int(round(abs(float(np.dot(self.slopes, widths)))))


@dataclass(frozen=True)
class MapFamily:
    """N self-maps of [0, 1) sharing a declared invariant measure.

    Build with :meth:`expanding_affine`, :meth:`rotation` or
    :meth:`piecewise_affine`. Invariance of user-defined piecewise maps is
    declared by the caller and never checked.
    """

    kind: str
    N: int
    params: dict = field(default_factory=dict, compare=False)
    invariant_measure: str = "lebesgue"
    _maps: tuple = field(default=(), repr=False, compare=False)
    degrees: tuple[int, ...] = ()

    @classmethod
    def expanding_affine(cls, N: int) -> MapFamily:
        """T_j(x) = (j + 1) x mod 1 for j = 1..N."""
        if N < 1:
            raise ValueError("N >= 1 required")
        maps = tuple(_Expanding(j + 1) for j in range(1, N + 1))
        return cls("expanding_affine", N, {}, "lebesgue", maps, tuple(j + 1 for j in range(1, N + 1)))

    @classmethod
    def rotation(cls, alphas) -> MapFamily:
        alphas = tuple(float(a) for a in alphas)
        if not alphas:
            raise ValueError("need at least one rotation angle")
        maps = tuple(_Rotation(a) for a in alphas)
        return cls("rotation", len(alphas), {"alphas": list(alphas)}, "lebesgue", maps, (1,) * len(alphas))

    @classmethod
    def piecewise_affine(cls, specs, invariant_measure: str = "lebesgue") -> MapFamily:
        """``specs`` holds one dict per map with keys breakpoints, slopes, offsets.

        Breakpoints may be given as rationals ("1/3").
        """
        maps = []
        for spec in specs:
            maps.append(PiecewiseAffineMap(
                tuple(_as_breakpoint(b) for b in spec["breakpoints"]),
                tuple(float(s) for s in spec["slopes"]),
                tuple(float(o) for o in spec.get("offsets", [0.0] * len(spec["slopes"]))),
            ))
        if not maps:
            raise ValueError("need at least one map")
        params = {"maps": [dict(s) for s in specs]}
        return cls("piecewise_affine", len(maps), params, invariant_measure, tuple(maps),
                   tuple(m.degree for m in maps))

    def map(self, j: int):
        if not 1 <= j <= self.N:
            raise DomainError(f"symbol {j} outside 1..{self.N}")
        return self._maps[j - 1]


@dataclass(frozen=True)
class _Expanding:
    slope: int

    def __call__(self, x):
        return mod1(self.slope * x)


@dataclass(frozen=True)
class _Rotation:
    alpha: float

    def __call__(self, x):
        return mod1(x + self.alpha)


def _check_point(x: float):
    if not 0.0 <= x < 1.0:
        raise DomainError(f"point {x!r} outside [0, 1)")


def apply_map(family: MapFamily, j: int, x: float) -> float:
    _check_point(x)
    return float(family.map(j)(float(x)))


def apply_map_array(family: MapFamily, symbols, xs: np.ndarray) -> np.ndarray:
    """Apply T_{symbols[i]} to xs[i] elementwise; ``symbols`` may be a scalar."""
    xs = np.asarray(xs, dtype=float)
    symbols = np.broadcast_to(np.asarray(symbols), xs.shape)
    out = np.empty_like(xs)
    for j in range(1, family.N + 1):
        mask = symbols == j
        if mask.any():
            out[mask] = family.map(j)(xs[mask])
    return out


def apply_word(family: MapFamily, w: Word, x: float) -> float:
    """T_w(x) with the first letter applied first."""
    _check_point(x)
    for j in w:
        x = apply_map(family, j, x)
    return x


@dataclass(frozen=True)
class OrbitSegment:
    base_point: float
    symbols: tuple[int, ...]
    states: tuple[float, ...]

    def __len__(self):
        return len(self.states)


def orbit(family: MapFamily, source: WordSource, x: float, n: int) -> OrbitSegment:
    """States x_0..x_n with x_{k+1} = T_{w_{k+1}}(x_k)."""
    if n < 0:
        raise ValueError("n >= 0 required")
    _check_point(x)
    syms = source.symbols(1, n + 1).tolist() if n else []
    states = [float(x)]
    for j in syms:
        states.append(float(family.map(j)(states[-1])))
    return OrbitSegment(float(x), tuple(syms), tuple(states))


def orbit_points(family: MapFamily, symbols, x: float) -> np.ndarray:
    """Orbit states x_0..x_len(symbols) as an array (the scalar fast path)."""
    out = np.empty(len(symbols) + 1)
    out[0] = x
    maps = [family.map(j) for j in range(1, family.N + 1)]
    for k, j in enumerate(symbols):
        out[k + 1] = maps[j - 1](out[k])
    return out
