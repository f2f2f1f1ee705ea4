"""Subadditivity checks, Fekete ratios and Kingman-type convergence diagnostics."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..dynamics import MapFamily, _check_point, apply_map_array, orbit_points
from ..words import WordSource, check_budget, shift, word_array
from .branch import branch_totals
from .observables import ObservableSequence
from .report import EstimatorReport, judge

SLACK = 1e-9
FEKETE_SLACK = 1e-12
# grid offset: an irrational shift keeps the grid off the dyadic rationals,
# which integer-slope maps send to 0 in finitely many steps
GRID_OFFSET = (math.sqrt(5.0) - 1.0) / 2.0


def default_panel(seed: int = 0, grid: int = 16, random: int = 16,
                  offset: float = GRID_OFFSET) -> list[float]:
    """Base points for almost-everywhere checks: (k + offset)/grid plus seeded uniforms."""
    pts = [(k + offset) / grid for k in range(grid)]
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0x5EED,)))
    pts.extend(float(v) for v in rng.random(random))
    return pts


# -- Fekete --------------------------------------------------------------------


def fekete_limit(seq, l: int = 1) -> EstimatorReport:
    """Ratios a_k / k (l = 1) or a_k / l^k (l >= 2), their running infimum, and
    every pair (n, p) with n + p <= K violating a_{n+p} <= a_n + l^n a_p."""
    a = np.asarray(seq, dtype=float)
    K = len(a)
    if K < 2:
        raise ValueError("need at least two terms")
    if l < 1:
        raise ValueError("l must be a positive integer")
    k = np.arange(1, K + 1)
    denom = k.astype(float) if l == 1 else float(l) ** k
    ratio = a / denom
    running_inf = np.minimum.accumulate(ratio)
    violations = []
    for n in range(1, K):
        ln = float(l) ** n
        for p in range(1, K - n + 1):
            lhs = a[n + p - 1]
            rhs = a[n - 1] + ln * a[p - 1]
            slack = FEKETE_SLACK * max(1.0, abs(a[n - 1]) + abs(ln * a[p - 1]))
            if lhs > rhs + slack:
                violations.append((n, p, float(lhs), float(rhs)))
    rep = EstimatorReport(
        quantity="fekete",
        index=k,
        estimates={"ratio": ratio},
        aux={"running_inf": running_inf},
        normalization="k" if l == 1 else f"{l}^k",
        meta={"l": l, "violations": violations, "final": float(ratio[-1]),
              "inf": float(running_inf[-1])},
    )
    return rep.judge_all()


# -- subadditivity -------------------------------------------------------------


class Violation(NamedTuple):
    x: float
    n: int
    p: int
    lhs: float
    rhs: float
    excess: float


@dataclass
class SubadditivityReport:
    mode: str
    observable: str
    violations: list[Violation] = field(default_factory=list)
    checked: int = 0
    max_excess: float = -math.inf
    max_abs_gap: float = 0.0

    @property
    def holds(self) -> bool:
        return not self.violations

    def records(self) -> list[dict]:
        return [v._asdict() for v in self.violations]


def _record(report, x, n, p, lhs, rhs, slack):
    report.checked += 1
    gap = lhs - rhs
    if not math.isnan(gap):
        report.max_excess = max(report.max_excess, gap)
        if math.isfinite(gap):
            report.max_abs_gap = max(report.max_abs_gap, abs(gap))
    if lhs > rhs + slack:
        report.violations.append(Violation(float(x), n, p, float(lhs), float(rhs), float(gap)))


def check_subadditivity(obs: ObservableSequence, family: MapFamily, mode: str, points,
                        n_range, p_range, source: WordSource | None = None,
                        slack: float = SLACK) -> SubadditivityReport:
    """Test the subadditivity inequality at every (x, n, p).

    fixed_word:   Phi_(n+p, w)(x) <= Phi_(n, w)(x) + Phi_(p, sigma^n w)(T_{w^n} x)
    branch_total: Phi_{n+p}(x) <= Phi_n(x) + sum_{|u|=n} Phi_p(T_u x)
    """
    n_range, p_range = list(n_range), list(p_range)
    if min(n_range + p_range) < 1:
        raise ValueError("n and p start at 1")
    if mode == "fixed_word":
        if source is None:
            raise ValueError("fixed_word mode needs a word source")
        return _check_fixed(obs.fixed_word, family, points, n_range, p_range, source, slack)
    if mode == "branch_total":
        return _check_branch(obs.branch(), family, points, n_range, p_range, slack)
    raise ValueError(f"unknown mode {mode!r}")


def _check_fixed(obs, family, points, n_range, p_range, source, slack):
    rep = SubadditivityReport("fixed_word", obs.label or obs.kind)
    n_top, p_top = max(n_range), max(p_range)
    for x in points:
        full = obs.sequence(family, source, x, n_top + p_top)
        syms = source.symbols(1, n_top + 1).tolist()
        pts = orbit_points(family, syms, x)
        for n in n_range:
            tail = obs.sequence(family, shift(source, n), float(pts[n]), p_top)
            for p in p_range:
                _record(rep, x, n, p, full[n + p - 1], full[n - 1] + tail[p - 1], slack)
    return rep


def _check_branch(obs, family, points, n_range, p_range, slack):
    rep = SubadditivityReport("branch_total", obs.label or obs.kind)
    n_top, p_top = max(n_range), max(p_range)
    check_budget(family.N, n_top + p_top)
    for x in points:
        totals = branch_totals(obs, family, x, n_top + p_top)
        for n in n_range:
            images = _word_images(family, x, n)
            tail = np.zeros(p_top)
            for y in images:
                tail += branch_totals(obs, family, float(y), p_top)
            for p in p_range:
                _record(rep, x, n, p, totals[n + p - 1], totals[n - 1] + tail[p - 1], slack)
    return rep


def _word_images(family, x, n):
    words = word_array(family.N, n)
    xs = np.full(words.shape[0], x)
    for i in range(n):
        xs = apply_map_array(family, words[:, i], xs)
    return xs


# -- Kingman -------------------------------------------------------------------


DIVISORS = ("n", "N^n", "n*N^n")


@dataclass
class KingmanReport:
    mode: str
    divisor: str
    reports: dict[float, EstimatorReport]
    invariance: list[dict]
    mean_limit: float
    running_inf: np.ndarray
    subadditivity: SubadditivityReport | None

    @property
    def limits(self) -> np.ndarray:
        return np.array([r.final() for r in self.reports.values()])

    @property
    def max_invariance_gap(self) -> float:
        gaps = [abs(r["discrepancy"]) for r in self.invariance if math.isfinite(r["discrepancy"])]
        return max(gaps, default=0.0)


def _divide(values, N, divisor):
    n = np.arange(1, len(values) + 1, dtype=float)
    if divisor == "n":
        return values / n
    if divisor == "N^n":
        return values / float(N) ** n
    if divisor == "n*N^n":
        return values / (n * float(N) ** n)
    raise ValueError(f"divisor must be one of {DIVISORS}")


def kingman_diagnostic(obs: ObservableSequence, family: MapFamily, source: WordSource | None,
                       points, n_max: int, divisor: str = "n", mode: str = "fixed_word",
                       invariance_steps: int = 3, tol: float = 1e-3,
                       precheck: tuple[int, int] | None = (4, 4)) -> KingmanReport:
    """Phi/divisor per base point with a verdict, plus an invariance comparison.

    fixed_word mode compares the limit estimate at x with the one at
    T_{w^j} x along sigma^j w, j = 1..invariance_steps; branch_total mode
    compares x with T_j x for every map. ``precheck`` runs check_subadditivity
    on n, p <= the given bounds first and warns on violations.
    """
    if divisor not in DIVISORS:
        raise ValueError(f"divisor must be one of {DIVISORS}")
    if mode == "fixed_word" and source is None:
        raise ValueError("fixed_word mode needs a word source")
    points = [float(x) for x in points]
    for x in points:
        _check_point(x)

    sub = None
    if precheck is not None:
        pn, pp = precheck
        sub = check_subadditivity(obs, family, mode, points[:4], range(1, pn + 1), range(1, pp + 1), source)
        if sub.violations:
            warnings.warn(f"{len(sub.violations)} subadditivity violations found; "
                          "convergence is not guaranteed", RuntimeWarning, stacklevel=2)

    def seq(x, src):
        if mode == "fixed_word":
            raw = obs.sequence(family, src, x, n_max)
        else:
            raw = branch_totals(obs, family, x, n_max)
        return _divide(raw, family.N, divisor)

    index = np.arange(1, n_max + 1)
    reports, invariance = {}, []
    for x in points:
        vals = seq(x, source)
        rep = EstimatorReport("kingman", index, {"ratio": vals}, normalization=divisor).judge_all(tol)
        reports[x] = rep
        if mode == "fixed_word":
            syms = source.symbols(1, invariance_steps + 1).tolist()
            pts = orbit_points(family, syms, x)
            images = [(f"T_w^{j}", float(pts[j]), shift(source, j)) for j in range(1, invariance_steps + 1)]
        else:
            images = [(f"T_{j}", float(family.map(j)(x)), None) for j in range(1, family.N + 1)]
        for label, y, src in images:
            other = float(seq(y, src)[-1])
            invariance.append({"x": x, "image": label, "y": y, "limit_x": float(vals[-1]),
                               "limit_y": other, "discrepancy": other - float(vals[-1])})

    stack = np.stack([r.estimates["ratio"] for r in reports.values()])
    mean_by_n = stack.mean(axis=0)
    return KingmanReport(mode, divisor, reports, invariance, float(mean_by_n[-1]),
                         np.minimum.accumulate(mean_by_n), sub)
