"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""
import math
import time

import numpy as np

from cocyclelab import CocycleGenerator, MapFamily, WordSource
from cocyclelab.cli import main
from cocyclelab.estimators import (birkhoff_random_average, branch_average_exact,
                                   branch_average_mc, check_subadditivity, default_panel,
                                   ergodic_average_path, fekete_limit, lambda_fixed)
from cocyclelab.estimators.observables import ObservableSequence
from cocyclelab.expr import Expression

from .conftest import ACCEPTANCE_LINES, LOG2, random_piecewise


def verdict(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_01_constant_diagonal():
    fam = MapFamily.expanding_affine(2)
    L = CocycleGenerator.constant([[2.0, 0.0], [0.0, 0.5]])
    t0 = time.perf_counter()
    rep = lambda_fixed(fam, L, WordSource.random(2, 0), 0.3, 10_000)
    dt = time.perf_counter() - t0
    err = max(np.abs(rep.estimates["lambda_plus"] - LOG2).max(),
              np.abs(rep.estimates["lambda_minus"] + LOG2).max())
    verdict(1, err < 1e-10 and dt < 1.0 and len(rep.index) == 10_000,
            f"diag(2,1/2) max |err| = {err:.2e} over m <= 10^4, {dt:.2f} s")


def test_02_isometry():
    fam = MapFamily.expanding_affine(2)
    th = 0.7
    L = CocycleGenerator.constant([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    rep = lambda_fixed(fam, L, WordSource.random(2, 1), 0.3, 10_000, stride=10_000)
    lp, lm = rep.final("lambda_plus"), rep.final("lambda_minus")
    verdict(2, abs(lp) < 1e-10 and abs(lm) < 1e-10, f"rotation lambda+ = {lp:.1e}, lambda- = {lm:.1e}")


def test_03_scalar_cross_path():
    fam = MapFamily.expanding_affine(2)
    src = WordSource.random(2, 2)
    rep = lambda_fixed(fam, CocycleGenerator.parametric([["exp(x)"]]), src, 0.3, 10_000)
    oracle = ergodic_average_path(fam, lambda x: x, src, 0.3, 10_000)
    err = max(np.abs(rep.estimates["lambda_plus"] - oracle).max(),
              np.abs(rep.estimates["lambda_minus"] - oracle).max())
    verdict(3, err < 1e-10, f"e^x cocycle vs scalar ergodic path, max |diff| = {err:.2e}")


def test_04_tree_vs_naive():
    worst, slowest = 0.0, 0.0
    phi = Expression("cos(3*x) + x")
    for seed in range(10):
        rng = np.random.default_rng(1000 + seed)
        fam = MapFamily.expanding_affine(int(rng.integers(1, 4)))
        L = random_piecewise(rng, d=int(rng.integers(1, 4)), cells=int(rng.integers(1, 5)))
        x = float(rng.random())
        t0 = time.perf_counter()
        tree = branch_average_exact(fam, L, x, 8, "per_word")
        bt = birkhoff_random_average(fam, phi, x, 8)
        slowest = max(slowest, time.perf_counter() - t0)
        naive = branch_average_exact(fam, L, x, 8, "per_word", naive=True)
        bn = birkhoff_random_average(fam, phi, x, 8, naive=True)
        pairs = [(tree.estimates[k], naive.estimates[k]) for k in ("Lambda_plus", "Lambda_minus")]
        pairs.append((bt.estimates["birkhoff_average"], bn.estimates["birkhoff_average"]))
        for a, b in pairs:
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))))
    fam3 = MapFamily.expanding_affine(3)
    L = random_piecewise(np.random.default_rng(5))
    t = branch_average_exact(fam3, L, 0.3, 10).meta["multiplications"]
    n = branch_average_exact(fam3, L, 0.3, 10, naive=True).meta["multiplications"]
    verdict(4, worst < 1e-9 and n >= 5 * t and slowest < 1.0,
            f"max rel diff {worst:.1e} on 10 configs; N=3 n=10 mults tree {t} vs naive {n} "
            f"({n / t:.1f}x); slowest config {slowest:.2f} s")


def test_05_birkhoff_panel():
    fam = MapFamily.expanding_affine(2)
    phi = Expression("x")
    t0 = time.perf_counter()
    finals = [birkhoff_random_average(fam, phi, x, 18).final() for x in default_panel(0)]
    dt = time.perf_counter() - t0
    hits = int(np.sum(np.abs(np.array(finals) - 0.5) < 0.1))
    # for information: the same check on a half-integer grid, whose dyadic points collapse to 0
    literal = [birkhoff_random_average(fam, phi, x, 18).final() for x in default_panel(0, offset=0.5)]
    lhits = int(np.sum(np.abs(np.array(literal) - 0.5) < 0.1))
    verdict(5, hits >= 28 and dt < 60, f"phi=x, n=18: {hits}/32 panel points within 0.1 of 1/2, "
                                       f"{dt:.1f} s (dyadic (k+1/2)/16 grid: {lhits}/32)")


def test_06_fekete():
    k = np.arange(1, 41)
    rep = fekete_limit(2.0**k + k, l=2)
    err = abs(rep.meta["final"] - 1.0)
    gap = abs(rep.meta["inf"] - rep.meta["final"])
    nv = len(rep.meta["violations"])
    verdict(6, nv == 0 and err < 1e-9 and gap < 1e-9,
            f"2^k+k, l=2: {nv} violations, |a40/2^40 - 1| = {err:.1e}, |inf - final| = {gap:.1e}")


def test_07_monte_carlo_calibration():
    fam = MapFamily.expanding_affine(2)
    L = CocycleGenerator.piecewise_constant(
        [0.0, 0.5, 1.0], [[[2.0, 1.0], [0.0, 1.0]], [[1.0, 0.0], [1.0, 3.0]]])
    exact = branch_average_exact(fam, L, 0.3, 12, "per_word").final("Lambda_plus")
    hits = 0
    for seed in range(100):
        rep = branch_average_mc(fam, L, 0.3, 12, 10_000, seed)
        hits += abs(rep.final("Lambda_plus") - exact) <= 4 * rep.aux["stderr_plus"][-1]
    verdict(7, hits >= 95, f"MC within 4 SE of exact for {hits}/100 seeds")


def test_08_subadditivity_suite():
    import json
    from pathlib import Path

    fam = MapFamily.expanding_affine(2)
    pts = default_panel(0)[:10]
    add = check_subadditivity(ObservableSequence.ergodic_sum(Expression("sin(5*x) + x")), fam,
                              "fixed_word", pts, range(1, 9), range(1, 9), WordSource.random(2, 4))
    rng = np.random.default_rng(8)
    sub = check_subadditivity(ObservableSequence.log_norm(random_piecewise(rng)), fam, "fixed_word",
                              rng.random(50).tolist(), range(1, 9), range(1, 9), WordSource.random(2, 6))
    oracle = json.loads((Path(__file__).resolve().parents[1] / "results" / "nsubadd_oracle.json").read_text())
    diag = CocycleGenerator.constant([[2.0, 0.0], [0.0, 0.5]])
    br = check_subadditivity(ObservableSequence.log_norm(diag), fam, "branch_total",
                             oracle["points"], range(1, 6), range(1, 6))
    ok = (add.holds and add.max_abs_gap < 1e-9 and sub.holds and sub.checked == 50 * 64
          and br.holds == oracle["inequality_holds_everywhere"] and len(br.violations) == oracle["violated"])
    verdict(8, ok, f"additivity gap {add.max_abs_gap:.1e}; log-norm violations {len(sub.violations)}"
                   f"/{sub.checked}; branch-total holds={br.holds} ({len(br.violations)}/{br.checked} "
                   f"violations, oracle {oracle['violated']}/{oracle['checked']})")


def test_09_normalization_divergence():
    fam = MapFamily.expanding_affine(2)
    L = CocycleGenerator.constant([[2.0, 0.0], [0.0, 0.5]])
    pw = branch_average_exact(fam, L, 0.3, 12, "per_word").verdict
    pwt = branch_average_exact(fam, L, 0.3, 12, "per_word_per_time").verdict
    ok = (pw.kind == "diverging" and abs(pw.slope - LOG2) < 1e-3
          and pwt.kind == "converged" and abs(pwt.limit - LOG2) < 1e-6)
    verdict(9, ok, f"per_word {pw.kind} slope {pw.slope:.6f}; per_word_per_time {pwt.kind} "
                   f"limit {pwt.limit:.9f}")


def test_10_determinism(tmp_path):
    from pathlib import Path

    cfg = Path(__file__).resolve().parents[1] / "configs" / "all.toml"
    outs = [tmp_path / "a", tmp_path / "b"]
    codes = [main(["run", "--config", str(cfg), "--out", str(o), "--threads", "2"]) for o in outs]
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    same = all((outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names)
    verdict(10, codes == [0, 0] and bool(names) and same,
            f"{len(names)} CSVs byte-identical across two runs: {same}")
