"""Execute a validated RunConfig: one CSV per experiment, violation JSON where
relevant, and a manifest. Compute modules never touch the filesystem; all
I/O lives here."""

from __future__ import annotations

import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import (RunConfig, build_cocycle, build_family, build_observable, build_source,
                     fekete_values)
from .estimators import (EstimatorReport, birkhoff_random_average, branch_average_exact,
                         branch_average_mc, check_subadditivity, default_panel, fekete_limit,
                         kingman_diagnostic, lambda_fixed)
from .expr import Expression

DEFAULT_X = 0.3


@dataclass
class RunManifest:
    config: dict
    config_hash: str
    tool_version: str = __version__
    log_base: str = "e"
    enumeration_budget: int = 0
    wall_time_s: float = 0.0
    experiments: list[dict] = field(default_factory=list)
    declarations: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True, default=_plain) + "\n"


def _plain(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return _num(float(v))
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(type(v).__name__)


def _num(v: float):
    return v if math.isfinite(v) else str(v)


def fmt(v) -> str:
    """17 significant digits, '.' decimal: round-trips every double."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def csv_text(meta: dict, columns: dict[str, list]) -> str:
    """A '#' metadata line, a header row, then one row per index value."""
    buf = io.StringIO()
    buf.write("# " + "; ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    names = list(columns)
    buf.write(",".join(names) + "\n")
    rows = len(next(iter(columns.values())))
    for i in range(rows):
        buf.write(",".join(fmt(columns[name][i]) for name in names) + "\n")
    return buf.getvalue()


def _labelled(report: EstimatorReport, index_name: str, extra: dict | None = None) -> dict:
    label = report.normalization
    cols = {index_name: list(report.index)}
    if extra:
        cols.update(extra)
    for key, col in report.columns().items():
        # raw log-norms stay unlabelled; everything else carries its normalization
        cols[f"{key}[{label}]" if label and not key.startswith("log_") else key] = list(col)
    return cols


class _Writer:
    def __init__(self, root: Path):
        self.root = root
        self.created: list[Path] = []
        self.made_root = not root.exists()

    def write(self, name: str, text: str) -> str:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / name
        path.write_text(text)
        self.created.append(path)
        return name

    def rollback(self):
        for p in self.created:
            p.unlink(missing_ok=True)
        if self.made_root and self.root.exists() and not any(self.root.iterdir()):
            self.root.rmdir()


def run(cfg: RunConfig) -> RunManifest:
    """Run every experiment in order; on any failure the files written so far are removed."""
    t0 = time.perf_counter()
    family = build_family(cfg.family)
    cocycle = build_cocycle(cfg.cocycle) if cfg.cocycle else None
    chash = cfg.config_hash()
    manifest = RunManifest(
        config=cfg.echo(), config_hash=chash, enumeration_budget=cfg.budget,
        declarations={
            "family_kind": family.kind,
            "invariant_measure": family.invariant_measure,
            "invariance_verified": family.kind != "piecewise_affine",
            "map_degrees": list(family.degrees),
            "degree_above_one": any(deg > 1 for deg in family.degrees),
        },
    )
    writer = _Writer(Path(cfg.output))
    many = len(cfg.experiments) > 1
    try:
        for i, exp in enumerate(cfg.experiments):
            stem = f"{i:02d}_{exp['kind']}" if many else exp["kind"]
            entry = _run_one(exp, cfg, family, cocycle, chash, stem, writer)
            manifest.experiments.append(entry)
        manifest.wall_time_s = time.perf_counter() - t0
        writer.write("manifest.json", manifest.to_json())
    except BaseException:
        writer.rollback()
        raise
    return manifest


def _verdicts(report: EstimatorReport) -> dict:
    return {k: v.as_dict() for k, v in report.verdicts.items()}


def _run_one(exp, cfg, family, cocycle, chash, stem, writer) -> dict:
    kind = exp["kind"]
    tol = exp.get("tol", 1e-3)
    x = float(exp.get("x", DEFAULT_X))
    meta = {"experiment": kind, "config_hash": chash, "log_base": "e"}
    entry = {"kind": kind}

    if kind == "lambda-fixed":
        src = build_source(exp.get("source"), family.N, cfg.seed)
        rep = lambda_fixed(family, cocycle, src, x, exp["m_max"], exp.get("stride", 1), tol=tol)
        meta.update(quantity="lambda_plus,lambda_minus", normalization="per_time", x=fmt(x))
        cols = _labelled(rep, "m", {"word_or_tag": [src.tag()] * len(rep.index)})
    elif kind == "branch-exact":
        norm = exp.get("normalization", "per_word_per_time")
        rep = branch_average_exact(family, cocycle, x, exp["n_max"], norm, naive=cfg.naive,
                                   threads=cfg.threads, tol=tol)
        meta.update(quantity="Lambda_plus,Lambda_minus", normalization=norm, x=fmt(x),
                    engine=rep.meta["engine"])
        cols = _labelled(rep, "n")
        entry["multiplications"] = rep.meta["multiplications"]
    elif kind == "branch-mc":
        norm = exp.get("normalization", "per_word")
        rep = branch_average_mc(family, cocycle, x, exp["n"], exp["samples"], cfg.seed, norm,
                                threads=cfg.threads)
        meta.update(quantity="Lambda_plus,Lambda_minus (Monte Carlo)", normalization=norm,
                    x=fmt(x), samples=exp["samples"], seed=cfg.seed)
        cols = _labelled(rep, "n")
    elif kind == "birkhoff":
        phi = Expression(str(exp["phi"]))
        rep = birkhoff_random_average(family, phi, x, exp["n_max"], naive=cfg.naive,
                                      threads=cfg.threads, tol=tol)
        meta.update(quantity=f"birkhoff_average[{phi.text}]", normalization="per_word_per_time",
                    x=fmt(x), engine=rep.meta["engine"])
        cols = _labelled(rep, "n")
    elif kind == "fekete":
        l = exp.get("l", 1)
        rep = fekete_limit(fekete_values(exp), l)
        meta.update(quantity="a_k/" + ("k" if l == 1 else f"{l}^k"), normalization=rep.normalization)
        cols = _labelled(rep, "k")
        entry["violations"] = writer.write(f"{stem}_violations.json",
                                           _json_records([dict(zip(("n", "p", "lhs", "rhs"), v))
                                                          for v in rep.meta["violations"]]))
        entry["violation_count"] = len(rep.meta["violations"])
    elif kind in ("kingman", "subadd-check"):
        return _run_subadditive(exp, cfg, family, cocycle, meta, entry, stem, writer)
    else:  # unreachable after validation
        raise ValueError(kind)

    entry["csv"] = writer.write(f"{stem}.csv", csv_text(meta, cols))
    entry["rows"] = len(rep.index)
    entry["verdicts"] = _verdicts(rep)
    return entry


def _points(exp, seed):
    pts = exp.get("points", "panel")
    return default_panel(seed) if pts == "panel" else [float(p) for p in pts]


def _run_subadditive(exp, cfg, family, cocycle, meta, entry, stem, writer):
    obs = build_observable(exp["observable"], cocycle)
    mode = exp.get("mode", "fixed_word")
    src = build_source(exp.get("source"), family.N, cfg.seed)
    points = _points(exp, cfg.seed)
    n_max = exp["n_max"]
    if exp["kind"] == "subadd-check":
        p_max = exp["p_max"]
        rep = check_subadditivity(obs, family, mode, points, range(1, n_max + 1), range(1, p_max + 1), src)
        per_n = {n: [v for v in rep.violations if v.n == n] for n in range(1, n_max + 1)}
        cols = {
            "n": list(range(1, n_max + 1)),
            "checked": [len(points) * p_max] * n_max,
            "violations": [len(per_n[n]) for n in per_n],
            "max_excess": [max((v.excess for v in per_n[n]), default=float("nan")) for n in per_n],
        }
        meta.update(quantity=f"subadditivity[{rep.observable}]", mode=mode, points=len(points),
                    p_max=p_max, slack="1e-09")
        entry["violations"] = writer.write(f"{stem}_violations.json", _json_records(rep.records()))
        entry.update(violation_count=len(rep.violations), checked=rep.checked,
                     max_abs_gap=_num(rep.max_abs_gap))
    else:
        divisor = exp.get("divisor", "n")
        rep = kingman_diagnostic(obs, family, src if mode == "fixed_word" else None, points, n_max,
                                 divisor=divisor, mode=mode,
                                 invariance_steps=exp.get("invariance_steps", 3),
                                 tol=exp.get("tol", 1e-3))
        cols = {"n": list(range(1, n_max + 1)),
                f"mean_over_points[/{divisor}]": None,
                f"running_inf_of_mean[/{divisor}]": list(rep.running_inf)}
        stack = np.stack([r.estimates["ratio"] for r in rep.reports.values()])
        cols[f"mean_over_points[/{divisor}]"] = list(stack.mean(axis=0))
        for j, (x, r) in enumerate(rep.reports.items()):
            cols[f"x{j}[/{divisor}]"] = list(r.estimates["ratio"])
        meta.update(quantity=f"kingman[{obs.label}]", mode=mode, divisor=divisor,
                    points=" ".join(fmt(x) for x in rep.reports))
        entry["invariance"] = writer.write(f"{stem}_invariance.json", _json_records(rep.invariance))
        entry["verdicts"] = {fmt(x): r.verdict.as_dict() for x, r in rep.reports.items()}
        entry["mean_limit"] = _num(rep.mean_limit)
        entry["max_invariance_gap"] = _num(rep.max_invariance_gap)
        if rep.subadditivity is not None:
            entry["precheck_violations"] = len(rep.subadditivity.violations)
    entry["csv"] = writer.write(f"{stem}.csv", csv_text(meta, cols))
    entry["rows"] = n_max
    return entry


def _json_records(records: list[dict]) -> str:
    clean = [{k: (_num(v) if isinstance(v, float) else v) for k, v in r.items()} for r in records]
    return json.dumps(clean, indent=1, default=_plain) + "\n"
