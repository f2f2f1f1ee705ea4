"""Observable sequences Phi_(n, w)(x) along a fixed word and their branch
totals Phi_n(x) = sum over all words of length n."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..cocycle import CocycleAccumulator, CocycleGenerator, _eval_one, norms
from ..dynamics import MapFamily, orbit_points
from ..expr import Expression
from ..words import Word, WordSource

NEG_INF = -math.inf

KINDS = ("ergodic_sum", "log_norm_cocycle", "log_conorm_cocycle", "branch_sum", "user_tabulated")


@dataclass(frozen=True)
class ObservableSequence:
    """What to measure along an orbit.

    ergodic_sum: S_n phi(x) = phi(x_0) + ... + phi(x_{n-1}).
    log_norm_cocycle / log_conorm_cocycle: log of the largest / smallest
    singular value of the cocycle product over the first n steps.
    branch_sum: the branch total of ``inner`` (used in branch_total mode).
    user_tabulated: ``table(word, x)`` supplies Phi_(|word|, word)(x).
    """

    kind: str
    phi: Callable | None = None
    cocycle: CocycleGenerator | None = None
    inner: ObservableSequence | None = None
    table: Callable[[Word, float], float] | None = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.kind == "ergodic_sum" and self.phi is None:
            raise ValueError("ergodic_sum needs phi")
        if self.kind in ("log_norm_cocycle", "log_conorm_cocycle") and self.cocycle is None:
            raise ValueError(f"{self.kind} needs a cocycle generator")
        if self.kind == "branch_sum" and (self.inner is None or self.inner.kind == "branch_sum"):
            raise ValueError("branch_sum wraps exactly one fixed-word observable")
        if self.kind == "user_tabulated" and self.table is None:
            raise ValueError("user_tabulated needs a table callable")

    @classmethod
    def ergodic_sum(cls, phi) -> ObservableSequence:
        label = phi if isinstance(phi, str) else getattr(phi, "__name__", "phi")
        if isinstance(phi, str):
            phi = Expression(phi)
        return cls("ergodic_sum", phi=phi, label=f"ergodic_sum[{label}]")

    @classmethod
    def log_norm(cls, L: CocycleGenerator) -> ObservableSequence:
        return cls("log_norm_cocycle", cocycle=L, label="log_norm_cocycle")

    @classmethod
    def log_conorm(cls, L: CocycleGenerator) -> ObservableSequence:
        return cls("log_conorm_cocycle", cocycle=L, label="log_conorm_cocycle")

    def branch(self) -> ObservableSequence:
        if self.kind == "branch_sum":
            return self
        return ObservableSequence("branch_sum", inner=self, label=f"branch_sum[{self.label or self.kind}]")

    @property
    def fixed_word(self) -> ObservableSequence:
        return self.inner if self.kind == "branch_sum" else self

    def sequence(self, family: MapFamily, source: WordSource, x: float, n_max: int) -> np.ndarray:
        """Phi_(n, w)(x) for n = 1..n_max, computed in one pass along the orbit."""
        obs = self.fixed_word
        if n_max < 1:
            return np.zeros(0)
        syms = source.symbols(1, n_max).tolist() if n_max > 1 else []
        pts = orbit_points(family, syms, x)  # x_0..x_{n_max-1}
        if obs.kind == "ergodic_sum":
            return np.cumsum(np.asarray(obs.phi(pts), dtype=float))
        if obs.kind == "user_tabulated":
            word = Word(tuple(syms) + (source.symbol(n_max),), source.alphabet_size)
            return np.array([float(obs.table(word[:n], x)) for n in range(1, n_max + 1)])
        L = obs.cocycle
        acc = CocycleAccumulator(L.d)
        out = np.empty(n_max)
        for k in range(n_max):
            acc.push(*_eval_one(L, float(pts[k])))
            pair = norms(acc.snapshot())
            out[k] = pair.log_smax if obs.kind == "log_norm_cocycle" else pair.log_smin
        return out

    def value(self, family: MapFamily, source: WordSource, x: float, n: int) -> float:
        return float(self.sequence(family, source, x, n)[-1])
