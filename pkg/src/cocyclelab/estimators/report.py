"""Estimator reports and the numerical convergence / divergence verdict."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-3
SLOPE_THRESHOLD = 1e-3
R2_MIN = 0.99


@dataclass(frozen=True)
class Verdict:
    kind: str  # "converged" | "diverging" | "undetermined"
    limit: float | None = None
    tol: float | None = None
    slope: float | None = None
    r2: float | None = None

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}


def judge(index, values, tol: float = DEFAULT_TOL, slope_threshold: float = SLOPE_THRESHOLD,
          r2_min: float = R2_MIN) -> Verdict:
    """Classify a sequence of estimates.

    Diverging: least-squares slope over the last half of the index range has
    |slope| > slope_threshold and R^2 > r2_min. Converged: the last three
    estimates fit in a band of width 2 * tol; the limit is the last estimate.
    """
    index = np.asarray(index, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) < 3 or not np.all(np.isfinite(values[-3:])):
        return Verdict("undetermined")
    half = len(values) // 2
    xs, ys = index[half:], values[half:]
    if len(xs) >= 2 and np.all(np.isfinite(ys)):
        slope, intercept = np.polyfit(xs, ys, 1)
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        if ss_tot > 0.0:
            ss_res = float(np.sum((ys - (slope * xs + intercept)) ** 2))
            r2 = 1.0 - ss_res / ss_tot
            if abs(slope) > slope_threshold and r2 > r2_min:
                return Verdict("diverging", slope=float(slope), r2=r2)
    last = values[-3:]
    if last.max() - last.min() <= 2.0 * tol:
        return Verdict("converged", limit=float(values[-1]), tol=tol)
    return Verdict("undetermined")


@dataclass
class EstimatorReport:
    """Estimates indexed by n (or m, or k), with per-column verdicts.

    ``estimates`` holds the primary sequences, ``aux`` the supporting ones
    (standard errors, running infima, raw log-norms) and ``meta`` anything
    that is not a per-index column (violation lists, counters).
    """

    quantity: str
    index: np.ndarray
    estimates: dict[str, np.ndarray]
    aux: dict[str, np.ndarray] = field(default_factory=dict)
    normalization: str | None = None
    verdicts: dict[str, Verdict] = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = np.asarray(self.index)
        for d in (self.estimates, self.aux):
            for key, col in d.items():
                col = np.asarray(col)
                if col.shape[0] != self.index.shape[0]:
                    raise ValueError(f"column {key!r} has {col.shape[0]} rows, index has {len(self.index)}")
                d[key] = col

    def judge_all(self, tol: float = DEFAULT_TOL) -> EstimatorReport:
        for key, col in self.estimates.items():
            if np.issubdtype(col.dtype, np.number):
                self.verdicts[key] = judge(self.index, col, tol=tol)
        return self

    @property
    def verdict(self) -> Verdict:
        """Verdict of the first estimate column."""
        return self.verdicts[next(iter(self.estimates))]

    def final(self, key: str | None = None) -> float:
        key = key or next(iter(self.estimates))
        return float(self.estimates[key][-1])

    def columns(self) -> dict[str, np.ndarray]:
        return {**self.estimates, **self.aux}
